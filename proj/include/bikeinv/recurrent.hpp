#ifndef BIKEINV_RECURRENT_HPP
#define BIKEINV_RECURRENT_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bikeinv/autodiff.hpp"
#include "bikeinv/ingest.hpp"
#include "bikeinv/nn.hpp"

namespace bikeinv {

/// P-RNN: Poisson rate is a deterministic function of the prior state.
/// VP-RNN: Gaussian latent pre-rate with an amortized LSTM posterior.
/// MOVP-RNN: the VP-RNN with a joint 2-dimensional [pickup, return] latent.
enum class ModelKind { PRnn, VpRnn, MovpRnn };

std::string model_kind_name(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);

enum class Target { Pickups, Returns, Both };

std::string target_name(Target target);
std::optional<Target> parse_target(std::string_view name);

struct NetworkShape {
  ModelKind kind = ModelKind::VpRnn;
  int covariate_dim = 0;
  int hidden = 128;

  int outputs() const { return kind == ModelKind::MovpRnn ? 2 : 1; }
  bool variational() const { return kind != ModelKind::PRnn; }
};

/// Standardizes the continuous covariate columns with training statistics.
/// One-hot columns pass through unchanged.
struct FeatureScaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static FeatureScaler identity(Eigen::Index width);
  static FeatureScaler fit(const CovariateMatrix& covariates);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
};

// Lower bound added to softplus-produced scales.
inline constexpr double kMinScale = 1e-4;

class RecurrentRateModel {
 public:
  RecurrentRateModel() = default;
  RecurrentRateModel(const NetworkShape& shape, std::uint64_t init_seed);

  NetworkShape shape;
  Target target = Target::Pickups;
  FeatureScaler scaler;
  bool carry_state = false;

  // Generative model (theta): GRU state rolled on covariates only.
  ad::GruCell prior_cell;
  ad::Mlp prior_head;  // rate (P-RNN) or [mean, raw scale] of the latent
  ad::Parameter prior_h0;

  // Inference network (phi), variational kinds only.
  ad::LstmCell posterior_cell;
  ad::Mlp posterior_head;  // [mean, raw scale]
  ad::Parameter posterior_h0;
  ad::Parameter posterior_c0;

  std::vector<ad::Parameter*> parameters();
  std::vector<const ad::Parameter*> parameters() const;
  std::size_t parameter_count() const;

  /// Sets the output-layer biases so the initial rates equal `mean_counts`
  /// and shrinks the output weights.
  void initialize_output(const Eigen::VectorXd& mean_counts);
};

/// Rows are time steps. The first `warmup_steps` rows only advance the
/// recurrent states and are not scored.
struct Sequence {
  Eigen::MatrixXd counts;      // T x outputs
  Eigen::MatrixXd covariates;  // T x covariate_dim, unscaled
  int warmup_steps = 0;

  Eigen::Index steps() const { return covariates.rows(); }
  Eigen::Index scored_steps() const { return steps() - warmup_steps; }
};

/// noise[sample][step] holds an outputs x batch standard-normal draw.
using Noise = std::vector<std::vector<Eigen::MatrixXd>>;

Noise draw_noise(int n_samples, Eigen::Index steps, int outputs, Eigen::Index batch,
                 std::mt19937_64& rng);

/// Sum over sequences and scored steps of -log Pois(x_t | rate_t). The
/// sequences must share length and warm-up.
ad::Var poisson_nll_graph(ad::Tape& tape, const RecurrentRateModel& model,
                          std::span<const Sequence> batch);

/// Negative ELBO summed over sequences: reparameterized Poisson
/// log-likelihood averaged over the noise samples minus the closed-form
/// Gaussian KL between posterior and prior at each step.
ad::Var negative_elbo_graph(ad::Tape& tape, const RecurrentRateModel& model,
                            std::span<const Sequence> batch, const Noise& noise);

/// The model's training objective (NLL or negative ELBO).
ad::Var objective_graph(ad::Tape& tape, const RecurrentRateModel& model,
                        std::span<const Sequence> batch, const Noise& noise);

/// Per-step distribution parameters from a forward pass (T x outputs each).
/// For the P-RNN only `rate` is filled.
struct StepDistributions {
  Eigen::MatrixXd rate;
  Eigen::MatrixXd prior_mean, prior_scale;
  Eigen::MatrixXd posterior_mean, posterior_scale;
};

StepDistributions step_distributions(const RecurrentRateModel& model, const Sequence& seq);

double prnn_nll(const RecurrentRateModel& model, const Sequence& seq);
double vprnn_elbo(const RecurrentRateModel& model, const Sequence& seq, int n_samples,
                  std::uint64_t seed);

/// Per-step importance-sampled marginal log-likelihood with the posterior as
/// proposal, log-mean-exp over `n_samples` draws, summed over scored steps.
/// For the P-RNN this is the exact log-likelihood.
double is_log_likelihood(const RecurrentRateModel& model, const Sequence& seq, int n_samples,
                         std::uint64_t seed);

struct PredictOptions {
  int n_samples = 100;
  std::uint64_t seed = 0;
  double scale_multiplier = 1.0;  // multiplies the prior scale
  double coverage = 0.95;
};

/// Mean forecast and equal-tailed interval, T x outputs.
struct RateForecast {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd lower;
  Eigen::MatrixXd upper;
};

/// Rolls the prior state on the day's covariates (after `warmup_covariates`
/// when the model carries state) and returns transformed prior samples'
/// mean and quantiles. Observed counts are never read.
RateForecast predict_rates(const RecurrentRateModel& model, const Eigen::MatrixXd& day_covariates,
                           const PredictOptions& options = {},
                           const Eigen::MatrixXd* warmup_covariates = nullptr);

struct TrainOptions {
  int hidden = 128;
  double learning_rate = 5e-3;
  int max_epochs = 200;
  int patience = 20;
  int batch_days = 32;
  double clip_norm = 5.0;
  int elbo_samples = 1;
  bool carry_state = false;
};

struct TrainReport {
  std::vector<double> train_loss;       // mean per scored step
  std::vector<double> validation_loss;  // mean per scored step
  int best_epoch = -1;
  double best_validation = std::numeric_limits<double>::infinity();
};

struct TrainedModel {
  RecurrentRateModel model;
  TrainReport report;
};

/// One sequence per day. With `carry_state`, each day is preceded by the
/// previous day as warm-up; the first day uses `previous` when given and is
/// dropped otherwise.
std::vector<Sequence> day_sequences(const DemandSeries& series, Target target, bool carry_state,
                                    const DemandSeries* previous = nullptr);

/// Adam on day-length sequences with early stopping on the validation
/// objective; returns the best-validation checkpoint. Throws TrainingError
/// when the loss becomes non-finite.
TrainedModel train(ModelKind kind, Target target, const DemandSeries& train_series,
                   const DemandSeries& validation_series, const TrainOptions& options,
                   std::uint64_t seed);

}  // namespace bikeinv

#endif  // BIKEINV_RECURRENT_HPP
