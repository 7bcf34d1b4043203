#include "bikeinv/queueing.hpp"

#include <ostream>

#include "bikeinv/csv.hpp"

namespace bikeinv {

std::vector<SimulatedEvent> sample_events(const RateSeries& rates, std::mt19937_64& rng) {
  rates.validate();
  std::vector<SimulatedEvent> out;
  const double width = rates.interval_hours();
  const double horizon = rates.horizon_hours();
  double peak = 0.0;
  for (Eigen::Index k = 0; k < rates.size(); ++k)
    peak = std::max(peak, rates.pickup_per_hour(k) + rates.return_per_hour(k));
  if (peak <= 0.0) return out;

  std::exponential_distribution<double> gap(peak);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double t = 0.0;
  while (true) {
    t += gap(rng);
    if (t >= horizon) break;
    const auto k = std::min<Eigen::Index>(static_cast<Eigen::Index>(t / width), rates.size() - 1);
    const double mu = rates.pickup_per_hour(k);
    const double lambda = rates.return_per_hour(k);
    const double u = unit(rng) * peak;
    if (u < mu)
      out.push_back({t, EventKind::Pickup});
    else if (u < mu + lambda)
      out.push_back({t, EventKind::Return});
  }
  return out;
}

EmpiricalDistribution monte_carlo_oracle(const RateSeries& rates, int start, int capacity,
                                         long long n_paths, std::uint64_t seed) {
  detail::check_queue_args(start, capacity);
  if (n_paths < 1) throw DomainError("n_paths must be >= 1");
  const Eigen::Index n = rates.size();
  const double width = rates.interval_hours();

  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n + 1, capacity + 1);
  std::mt19937_64 rng(seed);
  for (long long path = 0; path < n_paths; ++path) {
    const auto events = sample_events(rates, rng);
    int level = start;
    counts(0, level) += 1.0;
    std::size_t e = 0;
    for (Eigen::Index k = 1; k <= n; ++k) {
      const double boundary = width * static_cast<double>(k);
      for (; e < events.size() && events[e].time_hours < boundary; ++e) {
        if (events[e].kind == EventKind::Pickup) {
          if (level > 0) --level;
        } else if (level < capacity) {
          ++level;
        }
      }
      counts(k, level) += 1.0;
    }
  }

  EmpiricalDistribution out;
  out.capacity = capacity;
  out.start = start;
  out.n_paths = n_paths;
  for (Eigen::Index k = 0; k <= n; ++k) out.times.push_back(width * static_cast<double>(k));
  out.probs = counts / static_cast<double>(n_paths);
  out.std_errors =
      (out.probs.array() * (1.0 - out.probs.array()) / static_cast<double>(n_paths)).sqrt().matrix();
  return out;
}

void write_trajectory_csv(std::ostream& out, const ProbabilityTrajectory& traj) {
  out << "t_hours,sigma,probability\n";
  for (Eigen::Index k = 0; k < traj.probs.rows(); ++k)
    for (Eigen::Index s = 0; s < traj.probs.cols(); ++s)
      out << csv::format_double(traj.times[static_cast<std::size_t>(k)]) << ',' << s << ','
          << csv::format_double(traj.probs(k, s)) << '\n';
}

}  // namespace bikeinv
