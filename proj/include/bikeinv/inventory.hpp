#ifndef BIKEINV_INVENTORY_HPP
#define BIKEINV_INVENTORY_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>

#include "bikeinv/ingest.hpp"
#include "bikeinv/queueing.hpp"

namespace bikeinv {

struct PenaltyConfig {
  double lost_pickup = 1.0;  // l_p
  double lost_return = 1.0;  // l_r

  void validate() const {
    if (!(lost_pickup >= 0.0) || !(lost_return >= 0.0))
      throw DomainError("penalties must be non-negative");
  }
};

struct UdfCurve {
  int capacity = 0;
  Eigen::VectorXd values;  // UDF(s), s = 0..C
  int s_star = 0;
};

/// Expected penalty over the horizon for a solved trajectory:
///   integral of l_p mu_t p(s,0,t) + l_r lambda_t p(s,C,t) dt
/// by the composite trapezoid rule on the trajectory grid with the
/// derivative end correction, using dp/dt = Q p. Rates are constant inside
/// each interval.
template <typename Scalar>
Scalar udf_from_trajectory(const BasicTrajectory<Scalar>& traj, const BasicRateSeries<Scalar>& rates,
                           const PenaltyConfig& penalties) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index empty = 0;
  const Eigen::Index full = traj.capacity;
  const Scalar lp(penalties.lost_pickup);
  const Scalar lr(penalties.lost_return);
  Scalar total(0);
  for (Eigen::Index i = 0; i < rates.size(); ++i) {
    const Scalar mu = rates.pickup_per_hour(i);
    const Scalar lambda = rates.return_per_hour(i);
    const auto first = traj.interval_begin[static_cast<std::size_t>(i)];
    const auto last = traj.interval_begin[static_cast<std::size_t>(i) + 1];
    auto f = [&](Eigen::Index k) {
      return lp * mu * traj.probs(k, empty) + lr * lambda * traj.probs(k, full);
    };
    for (Eigen::Index k = first; k < last; ++k) {
      const Scalar dt = traj.times[static_cast<std::size_t>(k + 1)] - traj.times[static_cast<std::size_t>(k)];
      total += Scalar(0.5) * dt * (f(k) + f(k + 1));
    }
    // End correction h^2/12 (f'(a) - f'(b)); the interior terms telescope.
    if (last > first) {
      const Scalar h = (traj.times[static_cast<std::size_t>(last)] -
                        traj.times[static_cast<std::size_t>(first)]) /
                       Scalar(last - first);
      Vector dp(traj.capacity + 1);
      auto df = [&](Eigen::Index k) {
        apply_generator<Scalar>(Vector(traj.probs.row(k).transpose()), mu, lambda, dp);
        return lp * mu * dp[empty] + lr * lambda * dp[full];
      };
      total += h * h / Scalar(12) * (df(first) - df(last));
    }
  }
  return total;
}

template <typename Scalar>
Scalar udf(const BasicRateSeries<Scalar>& rates, int start, int capacity,
           const PenaltyConfig& penalties, const TransientOptions& options = {}) {
  penalties.validate();
  return udf_from_trajectory(transient_probabilities(rates, start, capacity, options), rates,
                             penalties);
}

/// Index of the smallest value; values within a relative 1e-12 of the
/// running minimum count as ties and keep the lower index.
int argmin_smallest(const Eigen::VectorXd& values);

/// UDF for every starting level 0..C and its smallest minimizer.
UdfCurve udf_curve(const RateSeries& rates, int capacity, const PenaltyConfig& penalties,
                   const TransientOptions& options = {});

/// Realized counts of one day read as per-interval rates.
RateSeries counts_as_rates(const DemandSeries& day);

/// UDF curve under perfect information about the day's realized counts.
UdfCurve oracle_decision(const DemandSeries& day, int capacity, const PenaltyConfig& penalties,
                         const TransientOptions& options = {});

/// Monte Carlo estimate of the UDF from simulated days: the mean penalty of
/// lost pickups and returns, for every starting level on common paths.
struct LostSalesEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_error;
  long long n_paths = 0;
};

LostSalesEstimate monte_carlo_udf(const RateSeries& rates, int capacity,
                                  const PenaltyConfig& penalties, long long n_paths,
                                  std::uint64_t seed);

/// Columns s, udf_value.
void write_udf_csv(std::ostream& out, const UdfCurve& curve);
/// {"station", "date", "s_star", "values"}.
std::string udf_json(const StationId& station, Date date, const UdfCurve& curve);

}  // namespace bikeinv

#endif  // BIKEINV_INVENTORY_HPP
