#ifndef BIKEINV_NN_HPP
#define BIKEINV_NN_HPP

#include <Eigen/Dense>

#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "bikeinv/autodiff.hpp"

namespace bikeinv::ad {

/// y = W x + b.
struct Linear {
  Parameter weight;  // out x in
  Parameter bias;    // out x 1

  Linear() = default;
  Linear(int in, int out, std::mt19937_64& rng, const std::string& name);

  struct Bound {
    Var weight, bias;
    Var operator()(const Var& x) const { return add_bias(matmul(weight, x), bias); }
  };
  Bound bind(Tape& tape) const { return {tape.parameter(weight), tape.parameter(bias)}; }
  void collect(std::vector<Parameter*>& out) { out.insert(out.end(), {&weight, &bias}); }
};

/// Gated recurrent unit, gate order (reset, update, candidate):
///   r = sig(W_r x + b_r + U_r h + c_r)
///   z = sig(W_z x + b_z + U_z h + c_z)
///   n = tanh(W_n x + b_n + r * (U_n h + c_n))
///   h' = (1 - z) * n + z * h
struct GruCell {
  int input = 0;
  int hidden = 0;
  Parameter w_ih, w_hh, b_ih, b_hh;

  GruCell() = default;
  GruCell(int input, int hidden, std::mt19937_64& rng, const std::string& name);

  struct Bound {
    Var w_ih, w_hh, b_ih, b_hh;
    int hidden;
    Var step(const Var& h, const Var& x) const;
  };
  Bound bind(Tape& tape) const;
  void collect(std::vector<Parameter*>& out) { out.insert(out.end(), {&w_ih, &w_hh, &b_ih, &b_hh}); }

  /// One update on plain matrices (columns are batch entries).
  Eigen::MatrixXd step(const Eigen::MatrixXd& h, const Eigen::MatrixXd& x) const;
};

/// LSTM with gate order (input, forget, cell, output) and an explicit cell
/// state.
struct LstmCell {
  int input = 0;
  int hidden = 0;
  Parameter w_ih, w_hh, b_ih, b_hh;

  LstmCell() = default;
  LstmCell(int input, int hidden, std::mt19937_64& rng, const std::string& name);

  struct State {
    Var h, c;
  };
  struct Bound {
    Var w_ih, w_hh, b_ih, b_hh;
    int hidden;
    State step(const State& s, const Var& x) const;
  };
  Bound bind(Tape& tape) const;
  void collect(std::vector<Parameter*>& out) { out.insert(out.end(), {&w_ih, &w_hh, &b_ih, &b_hh}); }
};

/// Two tanh hidden layers followed by a linear output layer.
struct Mlp {
  Linear hidden1, hidden2, output;

  Mlp() = default;
  Mlp(int in, int width, int out, std::mt19937_64& rng, const std::string& name);

  struct Bound {
    Linear::Bound hidden1, hidden2, output;
    Var operator()(const Var& x) const { return output(tanh(hidden2(tanh(hidden1(x))))); }
  };
  Bound bind(Tape& tape) const { return {hidden1.bind(tape), hidden2.bind(tape), output.bind(tape)}; }
  void collect(std::vector<Parameter*>& out) {
    hidden1.collect(out);
    hidden2.collect(out);
    output.collect(out);
  }
};

/// Rescales gradients in place so their joint L2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_gradients(std::vector<Eigen::MatrixXd>& grads, double max_norm);

/// Adam with bias correction.
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  /// grads[i] is the gradient of params[i]; the parameter list must keep
  /// the same order across calls.
  void step(const std::vector<Parameter*>& params, const std::vector<Eigen::MatrixXd>& grads);

 private:
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

}  // namespace bikeinv::ad

#endif  // BIKEINV_NN_HPP
