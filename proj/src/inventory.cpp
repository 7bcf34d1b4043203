#include "bikeinv/inventory.hpp"

#include <json.hpp>

#include <cmath>
#include <ostream>

#include "bikeinv/csv.hpp"

namespace bikeinv {

int argmin_smallest(const Eigen::VectorXd& values) {
  if (values.size() == 0) throw DomainError("argmin of empty vector");
  int best = 0;
  for (Eigen::Index s = 1; s < values.size(); ++s) {
    const double tol = 1e-12 * std::max(1.0, std::abs(values[best]));
    if (values[s] < values[best] - tol) best = static_cast<int>(s);
  }
  return best;
}

UdfCurve udf_curve(const RateSeries& rates, int capacity, const PenaltyConfig& penalties,
                   const TransientOptions& options) {
  if (capacity < 1) throw DomainError("capacity must be at least 1");
  penalties.validate();
  rates.validate();
  // Every starting level at once: column s of p is the distribution started
  // from s. Same RK4 steps, conditioning and quadrature as udf() per start.
  const int c = capacity;
  const Eigen::Index levels = c + 1;
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(levels, levels);
  Eigen::MatrixXd k1(levels, levels), k2(levels, levels), k3(levels, levels), k4(levels, levels),
      tmp(levels, levels);
  auto generator = [c](const Eigen::MatrixXd& x, double mu, double lambda, Eigen::MatrixXd& dx) {
    dx.noalias() = -(mu + lambda) * x;
    dx.row(0) += mu * x.row(0);
    dx.row(c) += lambda * x.row(c);
    dx.topRows(c) += mu * x.bottomRows(c);
    dx.bottomRows(c) += lambda * x.topRows(c);
  };
  const double lp = penalties.lost_pickup, lr = penalties.lost_return;
  const auto substeps = interval_substeps(rates, options);
  Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(levels);
  for (Eigen::Index k = 0; k < rates.size(); ++k) {
    const double mu = rates.pickup_per_hour(k), lambda = rates.return_per_hour(k);
    const int m = substeps[static_cast<std::size_t>(k)];
    const double h = rates.interval_hours() / m;
    auto integrand = [&](const Eigen::MatrixXd& x) -> Eigen::RowVectorXd {
      return lp * mu * x.row(0) + lr * lambda * x.row(c);
    };
    generator(p, mu, lambda, k1);
    const Eigen::RowVectorXd slope_first = integrand(k1);
    Eigen::RowVectorXd f_prev = integrand(p);
    for (int j = 0; j < m; ++j) {
      generator(p, mu, lambda, k1);
      tmp = p + (h / 2) * k1;
      generator(tmp, mu, lambda, k2);
      tmp = p + (h / 2) * k2;
      generator(tmp, mu, lambda, k3);
      tmp = p + h * k3;
      generator(tmp, mu, lambda, k4);
      p += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
      for (Eigen::Index s = 0; s < levels; ++s) {
        auto col = p.col(s);
        col = col.cwiseMax(0.0);
        const double mass = col.sum();
        if (std::abs(mass - 1.0) > options.renormalize_tolerance) col /= mass;
      }
      const Eigen::RowVectorXd f = integrand(p);
      total += 0.5 * h * (f_prev + f);
      f_prev = f;
    }
    generator(p, mu, lambda, k1);
    total += h * h / 12.0 * (slope_first - integrand(k1));
  }
  UdfCurve curve;
  curve.capacity = capacity;
  curve.values = total.transpose();
  curve.s_star = argmin_smallest(curve.values);
  return curve;
}

RateSeries counts_as_rates(const DemandSeries& day) {
  return {day.interval_minutes, day.pickups.cast<double>(), day.returns.cast<double>()};
}

UdfCurve oracle_decision(const DemandSeries& day, int capacity, const PenaltyConfig& penalties,
                         const TransientOptions& options) {
  if (day.n_days() != 1) throw DomainError("oracle decision needs exactly one day of counts");
  return udf_curve(counts_as_rates(day), capacity, penalties, options);
}

LostSalesEstimate monte_carlo_udf(const RateSeries& rates, int capacity,
                                  const PenaltyConfig& penalties, long long n_paths,
                                  std::uint64_t seed) {
  if (capacity < 1) throw DomainError("capacity must be at least 1");
  if (n_paths < 1) throw DomainError("n_paths must be >= 1");
  penalties.validate();
  const int levels = capacity + 1;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(levels);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(levels);
  Eigen::VectorXi level(levels);
  Eigen::VectorXd cost(levels);
  std::mt19937_64 rng(seed);
  for (long long path = 0; path < n_paths; ++path) {
    const auto events = sample_events(rates, rng);
    level = Eigen::VectorXi::LinSpaced(levels, 0, capacity);
    cost.setZero();
    for (const auto& e : events) {
      for (int s = 0; s < levels; ++s) {
        if (e.kind == EventKind::Pickup) {
          if (level[s] == 0)
            cost[s] += penalties.lost_pickup;
          else
            --level[s];
        } else if (level[s] == capacity) {
          cost[s] += penalties.lost_return;
        } else {
          ++level[s];
        }
      }
    }
    sum += cost;
    sum_sq += cost.cwiseProduct(cost);
  }
  LostSalesEstimate out;
  out.n_paths = n_paths;
  const double n = static_cast<double>(n_paths);
  out.mean = sum / n;
  const Eigen::VectorXd var =
      ((sum_sq / n - out.mean.cwiseProduct(out.mean)) * (n / std::max(1.0, n - 1.0))).cwiseMax(0.0);
  out.std_error = (var / n).cwiseSqrt();
  return out;
}

void write_udf_csv(std::ostream& out, const UdfCurve& curve) {
  out << "s,udf_value\n";
  for (Eigen::Index s = 0; s < curve.values.size(); ++s)
    out << s << ',' << csv::format_double(curve.values[s]) << '\n';
}

std::string udf_json(const StationId& station, Date date, const UdfCurve& curve) {
  nlohmann::json j;
  j["station"] = station;
  j["date"] = format_date(date);
  j["s_star"] = curve.s_star;
  j["values"] = std::vector<double>(curve.values.data(), curve.values.data() + curve.values.size());
  return j.dump();
}

}  // namespace bikeinv
