#include "bikeinv/recurrent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bikeinv {

namespace {

using ad::Var;

double inverse_softplus(double y) {
  y = std::max(y, 1e-3);
  return y > 30.0 ? y : std::log(std::expm1(y));
}

/// Batch laid out per step: column b is sequence b.
struct Stacked {
  std::vector<Eigen::MatrixXd> inputs;            // covariate_dim x B, scaled
  std::vector<Eigen::MatrixXd> counts;            // outputs x B
  std::vector<Eigen::MatrixXd> posterior_inputs;  // (covariate_dim + outputs) x B
  Eigen::Index steps = 0;
  Eigen::Index batch = 0;
  int warmup = 0;
};

Stacked stack(const RecurrentRateModel& model, std::span<const Sequence> seqs, bool with_posterior) {
  if (seqs.empty()) throw std::invalid_argument("empty batch");
  Stacked out;
  out.steps = seqs.front().steps();
  out.batch = static_cast<Eigen::Index>(seqs.size());
  out.warmup = seqs.front().warmup_steps;
  const int d = model.shape.outputs();
  const int in = model.shape.covariate_dim;
  out.inputs.assign(static_cast<std::size_t>(out.steps), Eigen::MatrixXd(in, out.batch));
  out.counts.assign(static_cast<std::size_t>(out.steps), Eigen::MatrixXd(d, out.batch));
  if (with_posterior)
    out.posterior_inputs.assign(static_cast<std::size_t>(out.steps), Eigen::MatrixXd(in + d, out.batch));
  for (Eigen::Index b = 0; b < out.batch; ++b) {
    const auto& s = seqs[static_cast<std::size_t>(b)];
    if (s.steps() != out.steps || s.warmup_steps != out.warmup)
      throw std::invalid_argument("sequences in a batch must share length and warm-up");
    if (s.covariates.cols() != in) throw std::invalid_argument("covariate width does not match the model");
    const bool has_counts = s.counts.rows() == s.steps() && s.counts.cols() == d;
    if (with_posterior && !has_counts) throw std::invalid_argument("counts do not match the model outputs");
    const Eigen::MatrixXd scaled = model.scaler.apply(s.covariates);
    for (Eigen::Index t = 0; t < out.steps; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      out.inputs[ti].col(b) = scaled.row(t).transpose();
      if (has_counts) out.counts[ti].col(b) = s.counts.row(t).transpose();
      if (with_posterior) {
        out.posterior_inputs[ti].col(b).head(in) = scaled.row(t).transpose();
        out.posterior_inputs[ti].col(b).tail(d) = s.counts.row(t).transpose().array().log1p().matrix();
      }
    }
  }
  return out;
}

struct GaussianParams {
  Var mean, scale;
};

GaussianParams split_gaussian(const Var& head, int d) {
  return {ad::slice_rows(head, 0, d), ad::softplus(ad::slice_rows(head, d, d)) + kMinScale};
}

/// Prior-head outputs per step.
std::vector<Var> roll_prior(ad::Tape& tape, const RecurrentRateModel& model, const Stacked& x) {
  const auto cell = model.prior_cell.bind(tape);
  const auto head = model.prior_head.bind(tape);
  Var h = ad::broadcast_cols(tape.parameter(model.prior_h0), x.batch);
  std::vector<Var> out;
  out.reserve(static_cast<std::size_t>(x.steps));
  for (Eigen::Index t = 0; t < x.steps; ++t) {
    h = cell.step(h, tape.constant(x.inputs[static_cast<std::size_t>(t)]));
    out.push_back(head(h));
  }
  return out;
}

std::vector<Var> roll_posterior(ad::Tape& tape, const RecurrentRateModel& model, const Stacked& x) {
  const auto cell = model.posterior_cell.bind(tape);
  const auto head = model.posterior_head.bind(tape);
  ad::LstmCell::State state{ad::broadcast_cols(tape.parameter(model.posterior_h0), x.batch),
                            ad::broadcast_cols(tape.parameter(model.posterior_c0), x.batch)};
  std::vector<Var> out;
  out.reserve(static_cast<std::size_t>(x.steps));
  for (Eigen::Index t = 0; t < x.steps; ++t) {
    state = cell.step(state, tape.constant(x.posterior_inputs[static_cast<std::size_t>(t)]));
    out.push_back(head(state.h));
  }
  return out;
}

Var accumulate_sum(const std::vector<Var>& terms) {
  Var total = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) total = total + terms[i];
  return total;
}

Eigen::MatrixXd to_rows(const std::vector<Eigen::MatrixXd>& per_step) {
  // per_step[t] is outputs x 1
  Eigen::MatrixXd out(static_cast<Eigen::Index>(per_step.size()), per_step.front().rows());
  for (std::size_t t = 0; t < per_step.size(); ++t) out.row(static_cast<Eigen::Index>(t)) = per_step[t].col(0).transpose();
  return out;
}

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::PRnn: return "prnn";
    case ModelKind::VpRnn: return "vprnn";
    case ModelKind::MovpRnn: return "movprnn";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  if (name == "prnn") return ModelKind::PRnn;
  if (name == "vprnn") return ModelKind::VpRnn;
  if (name == "movprnn") return ModelKind::MovpRnn;
  return std::nullopt;
}

std::string target_name(Target target) {
  switch (target) {
    case Target::Pickups: return "pickups";
    case Target::Returns: return "returns";
    case Target::Both: return "both";
  }
  return "unknown";
}

std::optional<Target> parse_target(std::string_view name) {
  if (name == "pickups") return Target::Pickups;
  if (name == "returns") return Target::Returns;
  if (name == "both") return Target::Both;
  return std::nullopt;
}

FeatureScaler FeatureScaler::identity(Eigen::Index width) {
  return {Eigen::VectorXd::Zero(width), Eigen::VectorXd::Ones(width)};
}

FeatureScaler FeatureScaler::fit(const CovariateMatrix& covariates) {
  auto out = identity(covariates.values.cols());
  if (covariates.rows() == 0) return out;
  for (int c : {CovariateLayout::temperature, CovariateLayout::rain_probability}) {
    const auto col = covariates.values.col(c).array();
    const double mean = col.mean();
    const double sd = std::sqrt((col - mean).square().mean());
    out.mean[c] = mean;
    out.scale[c] = sd > 1e-12 ? sd : 1.0;
  }
  return out;
}

Eigen::MatrixXd FeatureScaler::apply(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != mean.size()) throw std::invalid_argument("scaler width mismatch");
  return (rows.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

RecurrentRateModel::RecurrentRateModel(const NetworkShape& s, std::uint64_t init_seed) : shape(s) {
  if (s.covariate_dim < 1 || s.hidden < 1) throw std::invalid_argument("network dimensions must be positive");
  std::mt19937_64 rng(init_seed);
  const int d = s.outputs();
  const int head_out = s.variational() ? 2 * d : d;
  scaler = FeatureScaler::identity(s.covariate_dim);
  prior_cell = ad::GruCell(s.covariate_dim, s.hidden, rng, "prior.gru");
  prior_head = ad::Mlp(s.hidden, s.hidden, head_out, rng, "prior.mlp");
  prior_h0 = {"prior.h0", Eigen::MatrixXd::Zero(s.hidden, 1)};
  if (s.variational()) {
    posterior_cell = ad::LstmCell(s.covariate_dim + d, s.hidden, rng, "posterior.lstm");
    posterior_head = ad::Mlp(s.hidden, s.hidden, 2 * d, rng, "posterior.mlp");
    posterior_h0 = {"posterior.h0", Eigen::MatrixXd::Zero(s.hidden, 1)};
    posterior_c0 = {"posterior.c0", Eigen::MatrixXd::Zero(s.hidden, 1)};
  }
  target = d == 2 ? Target::Both : Target::Pickups;
}

std::vector<ad::Parameter*> RecurrentRateModel::parameters() {
  std::vector<ad::Parameter*> out;
  prior_cell.collect(out);
  prior_head.collect(out);
  out.push_back(&prior_h0);
  if (shape.variational()) {
    posterior_cell.collect(out);
    posterior_head.collect(out);
    out.push_back(&posterior_h0);
    out.push_back(&posterior_c0);
  }
  return out;
}

std::vector<const ad::Parameter*> RecurrentRateModel::parameters() const {
  auto mut = const_cast<RecurrentRateModel*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::size_t RecurrentRateModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += static_cast<std::size_t>(p->value.size());
  return n;
}

void RecurrentRateModel::initialize_output(const Eigen::VectorXd& mean_counts) {
  const int d = shape.outputs();
  if (mean_counts.size() != d) throw std::invalid_argument("initialize_output: wrong dimension");
  auto init_head = [&](ad::Mlp& head) {
    head.output.weight.value *= 0.1;
    for (int i = 0; i < d; ++i) {
      head.output.bias.value(i, 0) = inverse_softplus(mean_counts[i]);
      if (shape.variational()) head.output.bias.value(d + i, 0) = inverse_softplus(0.5);
    }
  };
  init_head(prior_head);
  if (shape.variational()) init_head(posterior_head);
}

Noise draw_noise(int n_samples, Eigen::Index steps, int outputs, Eigen::Index batch,
                 std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Noise noise(static_cast<std::size_t>(n_samples));
  for (auto& per_step : noise) {
    per_step.resize(static_cast<std::size_t>(steps));
    for (auto& m : per_step) {
      m.resize(outputs, batch);
      for (Eigen::Index j = 0; j < batch; ++j)
        for (int i = 0; i < outputs; ++i) m(i, j) = normal(rng);
    }
  }
  return noise;
}

Var poisson_nll_graph(ad::Tape& tape, const RecurrentRateModel& model, std::span<const Sequence> batch) {
  if (model.shape.variational()) throw std::invalid_argument("poisson_nll_graph needs a P-RNN");
  const auto x = stack(model, batch, false);
  const auto heads = roll_prior(tape, model, x);
  std::vector<Var> terms;
  for (Eigen::Index t = x.warmup; t < x.steps; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    terms.push_back(ad::sum(ad::poisson_log_pmf(ad::softplus(heads[ti]), x.counts[ti])));
  }
  return -accumulate_sum(terms);
}

Var negative_elbo_graph(ad::Tape& tape, const RecurrentRateModel& model, std::span<const Sequence> batch,
                        const Noise& noise) {
  if (!model.shape.variational()) throw std::invalid_argument("negative_elbo_graph needs a variational model");
  if (noise.empty()) throw std::invalid_argument("negative_elbo_graph needs at least one noise sample");
  const int d = model.shape.outputs();
  const auto x = stack(model, batch, true);
  const auto prior = roll_prior(tape, model, x);
  const auto posterior = roll_posterior(tape, model, x);
  const double inv_samples = 1.0 / static_cast<double>(noise.size());
  std::vector<Var> terms;
  for (Eigen::Index t = x.warmup; t < x.steps; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    const auto p = split_gaussian(prior[ti], d);
    const auto q = split_gaussian(posterior[ti], d);
    for (const auto& per_step : noise) {
      const Var latent = ad::reparameterize(q.mean, q.scale, per_step[ti]);
      terms.push_back(inv_samples * ad::sum(ad::poisson_log_pmf(ad::softplus(latent), x.counts[ti])));
    }
    terms.push_back(-ad::sum(ad::gaussian_kl(q.mean, q.scale, p.mean, p.scale)));
  }
  return -accumulate_sum(terms);
}

Var objective_graph(ad::Tape& tape, const RecurrentRateModel& model, std::span<const Sequence> batch,
                    const Noise& noise) {
  return model.shape.variational() ? negative_elbo_graph(tape, model, batch, noise)
                                   : poisson_nll_graph(tape, model, batch);
}

StepDistributions step_distributions(const RecurrentRateModel& model, const Sequence& seq) {
  ad::Tape tape;
  tape.set_recording(false);
  const int d = model.shape.outputs();
  const std::span<const Sequence> one(&seq, 1);
  const bool variational = model.shape.variational();
  const auto x = stack(model, one, variational && seq.counts.rows() == seq.steps());
  const auto prior = roll_prior(tape, model, x);
  StepDistributions out;
  std::vector<Eigen::MatrixXd> a, b;
  if (!variational) {
    for (const auto& h : prior) a.push_back(ad::softplus(h.value()));
    out.rate = to_rows(a);
    return out;
  }
  for (const auto& h : prior) {
    const auto g = split_gaussian(h, d);
    a.push_back(g.mean.value());
    b.push_back(g.scale.value());
  }
  out.prior_mean = to_rows(a);
  out.prior_scale = to_rows(b);
  if (x.posterior_inputs.empty()) return out;
  a.clear();
  b.clear();
  for (const auto& h : roll_posterior(tape, model, x)) {
    const auto g = split_gaussian(h, d);
    a.push_back(g.mean.value());
    b.push_back(g.scale.value());
  }
  out.posterior_mean = to_rows(a);
  out.posterior_scale = to_rows(b);
  return out;
}

double prnn_nll(const RecurrentRateModel& model, const Sequence& seq) {
  ad::Tape tape;
  tape.set_recording(false);
  return poisson_nll_graph(tape, model, std::span<const Sequence>(&seq, 1)).value()(0, 0);
}

double vprnn_elbo(const RecurrentRateModel& model, const Sequence& seq, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  std::mt19937_64 rng(seed);
  const auto noise = draw_noise(n_samples, seq.steps(), model.shape.outputs(), 1, rng);
  ad::Tape tape;
  tape.set_recording(false);
  return -negative_elbo_graph(tape, model, std::span<const Sequence>(&seq, 1), noise).value()(0, 0);
}

double is_log_likelihood(const RecurrentRateModel& model, const Sequence& seq, int n_samples,
                         std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (!model.shape.variational()) return -prnn_nll(model, seq);
  const auto dist = step_distributions(model, seq);
  const int d = model.shape.outputs();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> log_w(static_cast<std::size_t>(n_samples));
  double total = 0.0;
  for (Eigen::Index t = seq.warmup_steps; t < seq.steps(); ++t) {
    for (auto& lw : log_w) {
      lw = 0.0;
      for (int i = 0; i < d; ++i) {
        const double mq = dist.posterior_mean(t, i), sq = dist.posterior_scale(t, i);
        const double latent = mq + sq * normal(rng);
        const double rate = ad::softplus(Eigen::MatrixXd::Constant(1, 1, latent))(0, 0);
        lw += ad::log_poisson(seq.counts(t, i), rate) +
              ad::log_normal(latent, dist.prior_mean(t, i), dist.prior_scale(t, i)) -
              ad::log_normal(latent, mq, sq);
      }
    }
    const double peak = *std::max_element(log_w.begin(), log_w.end());
    double acc = 0.0;
    for (double lw : log_w) acc += std::exp(lw - peak);
    total += peak + std::log(acc / static_cast<double>(n_samples));
  }
  return total;
}

RateForecast predict_rates(const RecurrentRateModel& model, const Eigen::MatrixXd& day_covariates,
                           const PredictOptions& options, const Eigen::MatrixXd* warmup_covariates) {
  if (options.n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  Sequence seq;
  if (model.carry_state && warmup_covariates && warmup_covariates->rows() > 0) {
    seq.covariates.resize(warmup_covariates->rows() + day_covariates.rows(), day_covariates.cols());
    seq.covariates << *warmup_covariates, day_covariates;
    seq.warmup_steps = static_cast<int>(warmup_covariates->rows());
  } else {
    seq.covariates = day_covariates;
  }
  const auto dist = step_distributions(model, seq);
  const Eigen::Index w = seq.warmup_steps;
  const Eigen::Index steps = day_covariates.rows();
  const int d = model.shape.outputs();
  RateForecast out;
  if (!model.shape.variational()) {
    out.mean = dist.rate.bottomRows(steps);
    out.lower = out.mean;
    out.upper = out.mean;
    return out;
  }
  out.mean.resize(steps, d);
  out.lower.resize(steps, d);
  out.upper.resize(steps, d);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double tail = 0.5 * (1.0 - options.coverage);
  std::vector<double> draws(static_cast<std::size_t>(options.n_samples));
  for (Eigen::Index t = 0; t < steps; ++t) {
    for (int i = 0; i < d; ++i) {
      const double mu = dist.prior_mean(w + t, i);
      const double sd = options.scale_multiplier * dist.prior_scale(w + t, i);
      for (auto& v : draws) {
        const double latent = mu + sd * normal(rng);
        v = std::max(latent, 0.0) + std::log1p(std::exp(-std::abs(latent)));
      }
      out.mean(t, i) = std::accumulate(draws.begin(), draws.end(), 0.0) / static_cast<double>(draws.size());
      std::sort(draws.begin(), draws.end());
      out.lower(t, i) = quantile_sorted(draws, tail);
      out.upper(t, i) = quantile_sorted(draws, 1.0 - tail);
    }
  }
  return out;
}

std::vector<Sequence> day_sequences(const DemandSeries& series, Target target, bool carry_state,
                                    const DemandSeries* previous) {
  const int slots = series.slots();
  const int d = target == Target::Both ? 2 : 1;
  if (series.covariates.rows() != series.size())
    throw DataError(series.station + ": neural models need covariates aligned with counts");
  auto counts_rows = [&](const DemandSeries& s, Eigen::Index start, Eigen::Index len) {
    Eigen::MatrixXd c(len, d);
    if (target == Target::Both) {
      c.col(0) = s.pickups.segment(start, len).cast<double>();
      c.col(1) = s.returns.segment(start, len).cast<double>();
    } else {
      c.col(0) = (target == Target::Pickups ? s.pickups : s.returns).segment(start, len).cast<double>();
    }
    return c;
  };
  std::vector<Sequence> out;
  for (int day = 0; day < series.n_days(); ++day) {
    const Eigen::Index start = static_cast<Eigen::Index>(day) * slots;
    Sequence seq;
    seq.counts = counts_rows(series, start, slots);
    seq.covariates = series.covariates.values.middleRows(start, slots);
    if (carry_state) {
      const DemandSeries* src = &series;
      Eigen::Index prev_start = start - slots;
      if (day == 0) {
        if (!previous || previous->n_days() == 0 || previous->covariates.rows() != previous->size()) continue;
        src = previous;
        prev_start = previous->size() - slots;
      }
      Eigen::MatrixXd counts(2 * slots, d), cov(2 * slots, seq.covariates.cols());
      counts << counts_rows(*src, prev_start, slots), seq.counts;
      cov << src->covariates.values.middleRows(prev_start, slots), seq.covariates;
      seq.counts = std::move(counts);
      seq.covariates = std::move(cov);
      seq.warmup_steps = slots;
    }
    out.push_back(std::move(seq));
  }
  return out;
}

TrainedModel train(ModelKind kind, Target target, const DemandSeries& train_series,
                   const DemandSeries& validation_series, const TrainOptions& options, std::uint64_t seed) {
  if ((kind == ModelKind::MovpRnn) != (target == Target::Both))
    throw std::invalid_argument("the multi-output model trains on both processes, the others on one");
  if (options.batch_days < 1 || options.max_epochs < 1 || options.elbo_samples < 1)
    throw std::invalid_argument("invalid training options");

  std::mt19937_64 rng(seed);
  const std::uint64_t init_seed = rng();
  NetworkShape shape{kind, static_cast<int>(train_series.covariates.values.cols()), options.hidden};
  TrainedModel result{RecurrentRateModel(shape, init_seed), {}};
  auto& model = result.model;
  model.target = target;
  model.carry_state = options.carry_state;
  model.scaler = FeatureScaler::fit(train_series.covariates);

  const auto train_seqs = day_sequences(train_series, target, options.carry_state);
  const auto val_seqs = day_sequences(validation_series, target, options.carry_state, &train_series);
  if (train_seqs.empty() || val_seqs.empty()) throw DataError("not enough days to train and validate");

  Eigen::VectorXd mean_counts = Eigen::VectorXd::Zero(shape.outputs());
  double n_rows = 0.0;
  for (const auto& s : train_seqs) {
    mean_counts += s.counts.bottomRows(s.scored_steps()).colwise().sum().transpose();
    n_rows += static_cast<double>(s.scored_steps());
  }
  model.initialize_output(mean_counts / n_rows);

  const int d = shape.outputs();
  const std::uint64_t validation_seed = rng();
  auto validation_loss = [&](const RecurrentRateModel& m) {
    std::mt19937_64 vrng(validation_seed);
    const auto noise = draw_noise(options.elbo_samples, val_seqs.front().steps(), d,
                                  static_cast<Eigen::Index>(val_seqs.size()), vrng);
    ad::Tape tape;
    tape.set_recording(false);
    const double total = objective_graph(tape, m, val_seqs, noise).value()(0, 0);
    return total / static_cast<double>(val_seqs.size() * static_cast<std::size_t>(val_seqs.front().scored_steps()));
  };

  ad::Adam adam(options.learning_rate);
  auto params = model.parameters();
  RecurrentRateModel best = model;
  std::vector<std::size_t> order(train_seqs.size());
  std::iota(order.begin(), order.end(), 0);
  int stale = 0;
  double last_finite = std::numeric_limits<double>::quiet_NaN();
  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t epoch_steps = 0;
    for (std::size_t first = 0; first < order.size(); first += static_cast<std::size_t>(options.batch_days)) {
      const std::size_t last = std::min(order.size(), first + static_cast<std::size_t>(options.batch_days));
      std::vector<Sequence> batch;
      for (std::size_t i = first; i < last; ++i) batch.push_back(train_seqs[order[i]]);
      const auto noise = model.shape.variational()
                             ? draw_noise(options.elbo_samples, batch.front().steps(), d,
                                          static_cast<Eigen::Index>(batch.size()), rng)
                             : Noise{};
      const double scored = static_cast<double>(batch.size() * static_cast<std::size_t>(batch.front().scored_steps()));
      ad::Tape tape;
      const Var loss = (1.0 / scored) * objective_graph(tape, model, batch, noise);
      const double value = loss.value()(0, 0);
      if (!std::isfinite(value))
        throw TrainingError(model_kind_name(kind) + " (" + target_name(target) + "): non-finite loss at epoch " +
                            std::to_string(epoch) + ", batch starting " + std::to_string(first) +
                            "; last finite batch loss " + std::to_string(last_finite));
      last_finite = value;
      tape.backward(loss);
      auto grads_by_param = tape.gradients();
      std::vector<Eigen::MatrixXd> grads;
      grads.reserve(params.size());
      for (auto* p : params) grads.push_back(std::move(grads_by_param.at(p)));
      const double norm = ad::clip_gradients(grads, options.clip_norm);
      if (!std::isfinite(norm))
        throw TrainingError(model_kind_name(kind) + ": non-finite gradient at epoch " + std::to_string(epoch));
      adam.step(params, grads);
      epoch_loss += value * scored;
      epoch_steps += static_cast<std::size_t>(scored);
    }
    result.report.train_loss.push_back(epoch_loss / static_cast<double>(epoch_steps));
    const double vloss = validation_loss(model);
    if (!std::isfinite(vloss))
      throw TrainingError(model_kind_name(kind) + ": non-finite validation loss at epoch " + std::to_string(epoch));
    result.report.validation_loss.push_back(vloss);
    if (vloss < result.report.best_validation) {
      result.report.best_validation = vloss;
      result.report.best_epoch = epoch;
      best = model;
      stale = 0;
    } else if (++stale >= options.patience) {
      break;
    }
  }
  result.model = std::move(best);
  return result;
}

}  // namespace bikeinv
