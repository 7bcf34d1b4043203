#include "bikeinv/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace bikeinv::ad {

namespace {

Eigen::MatrixXd uniform(Eigen::Index rows, Eigen::Index cols, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

}  // namespace

Linear::Linear(int in, int out, std::mt19937_64& rng, const std::string& name) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight = {name + ".weight", uniform(out, in, bound, rng)};
  bias = {name + ".bias", uniform(out, 1, bound, rng)};
}

GruCell::GruCell(int input_dim, int hidden_dim, std::mt19937_64& rng, const std::string& name)
    : input(input_dim), hidden(hidden_dim) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  w_ih = {name + ".w_ih", uniform(3 * hidden, input, bound, rng)};
  w_hh = {name + ".w_hh", uniform(3 * hidden, hidden, bound, rng)};
  b_ih = {name + ".b_ih", uniform(3 * hidden, 1, bound, rng)};
  b_hh = {name + ".b_hh", uniform(3 * hidden, 1, bound, rng)};
}

GruCell::Bound GruCell::bind(Tape& tape) const {
  return {tape.parameter(w_ih), tape.parameter(w_hh), tape.parameter(b_ih), tape.parameter(b_hh),
          hidden};
}

Var GruCell::Bound::step(const Var& h, const Var& x) const {
  if (x.rows() != w_ih.cols() || h.rows() != hidden)
    throw std::invalid_argument("GRU step: dimension mismatch");
  const Var gi = add_bias(matmul(w_ih, x), b_ih);
  const Var gh = add_bias(matmul(w_hh, h), b_hh);
  const Var r = sigmoid(slice_rows(gi, 0, hidden) + slice_rows(gh, 0, hidden));
  const Var z = sigmoid(slice_rows(gi, hidden, hidden) + slice_rows(gh, hidden, hidden));
  const Var n = tanh(slice_rows(gi, 2 * hidden, hidden) + r * slice_rows(gh, 2 * hidden, hidden));
  // (1 - z) * n + z * h  ==  n + z * (h - n)
  return n + z * (h - n);
}

Eigen::MatrixXd GruCell::step(const Eigen::MatrixXd& h, const Eigen::MatrixXd& x) const {
  Tape tape;
  return bind(tape).step(tape.constant(h), tape.constant(x)).value();
}

LstmCell::LstmCell(int input_dim, int hidden_dim, std::mt19937_64& rng, const std::string& name)
    : input(input_dim), hidden(hidden_dim) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  w_ih = {name + ".w_ih", uniform(4 * hidden, input, bound, rng)};
  w_hh = {name + ".w_hh", uniform(4 * hidden, hidden, bound, rng)};
  b_ih = {name + ".b_ih", uniform(4 * hidden, 1, bound, rng)};
  b_hh = {name + ".b_hh", uniform(4 * hidden, 1, bound, rng)};
}

LstmCell::Bound LstmCell::bind(Tape& tape) const {
  return {tape.parameter(w_ih), tape.parameter(w_hh), tape.parameter(b_ih), tape.parameter(b_hh),
          hidden};
}

LstmCell::State LstmCell::Bound::step(const State& s, const Var& x) const {
  if (x.rows() != w_ih.cols() || s.h.rows() != hidden)
    throw std::invalid_argument("LSTM step: dimension mismatch");
  const Var gates = add_bias(matmul(w_ih, x), b_ih) + add_bias(matmul(w_hh, s.h), b_hh);
  const Var i = sigmoid(slice_rows(gates, 0, hidden));
  const Var f = sigmoid(slice_rows(gates, hidden, hidden));
  const Var g = tanh(slice_rows(gates, 2 * hidden, hidden));
  const Var o = sigmoid(slice_rows(gates, 3 * hidden, hidden));
  const Var c = f * s.c + i * g;
  return {o * tanh(c), c};
}

Mlp::Mlp(int in, int width, int out, std::mt19937_64& rng, const std::string& name)
    : hidden1(in, width, rng, name + ".0"),
      hidden2(width, width, rng, name + ".1"),
      output(width, out, rng, name + ".2") {}

double clip_gradients(std::vector<Eigen::MatrixXd>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) sq += g.squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& g : grads) g *= scale;
  }
  return norm;
}

void Adam::step(const std::vector<Parameter*>& params, const std::vector<Eigen::MatrixXd>& grads) {
  if (params.size() != grads.size()) throw std::invalid_argument("Adam: params/grads size mismatch");
  if (m_.empty()) {
    for (const auto* p : params) {
      m_.push_back(Eigen::MatrixXd::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Eigen::MatrixXd::Zero(p->value.rows(), p->value.cols()));
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseProduct(grads[i]);
    params[i]->value.array() -=
        lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

}  // namespace bikeinv::ad
