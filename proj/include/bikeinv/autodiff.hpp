#ifndef BIKEINV_AUTODIFF_HPP
#define BIKEINV_AUTODIFF_HPP

#include <Eigen/Dense>

#include <functional>
#include <initializer_list>
#include <string>
#include <unordered_map>
#include <vector>

namespace bikeinv::ad {

/// A named trainable matrix.
struct Parameter {
  std::string name;
  Eigen::MatrixXd value;
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Eigen::MatrixXd& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records matrix-valued operations for reverse-mode differentiation of a
/// scalar. Nodes that depend only on constants carry no backward closure.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Var constant(Eigen::MatrixXd value);
  /// Leaf bound to a parameter; its gradient is reported by gradients().
  /// With recording disabled this is a plain constant.
  Var parameter(const Parameter& p);

  void set_recording(bool on) { recording_ = on; }
  /// Appends an op result. `inputs` decide whether the node needs a gradient.
  /// The closure is only stored when some input needs a gradient.
  template <typename Inputs, typename F>
  Var push(Eigen::MatrixXd value, const Inputs& inputs, F&& backward) {
    bool needs = false;
    for (const auto& v : inputs) needs = needs || nodes_[v.id()].requires_grad;
    nodes_.push_back({std::move(value), {}, needs ? Backward(std::forward<F>(backward)) : Backward{}, nullptr, needs});
    return {this, nodes_.size() - 1};
  }
  template <typename F>
  Var push(Eigen::MatrixXd value, std::initializer_list<Var> inputs, F&& backward) {
    return push<std::initializer_list<Var>>(std::move(value), inputs, std::forward<F>(backward));
  }

  const Eigen::MatrixXd& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  const Eigen::MatrixXd& grad(std::size_t id) const { return nodes_[id].grad; }
  /// Adds `delta` to the node's gradient when the node needs one.
  template <typename Derived>
  void accumulate(std::size_t id, const Eigen::MatrixBase<Derived>& delta) {
    auto& node = nodes_[id];
    if (!node.requires_grad) return;
    if (node.grad.size() == 0)
      node.grad = delta;
    else
      node.grad += delta;
  }

  /// Seeds d(loss)/d(loss) = 1 and runs the recorded closures in reverse.
  void backward(const Var& loss);

  /// Gradient per bound parameter, summed over every leaf bound to it.
  /// Parameters that did not reach the loss get a zero matrix.
  std::unordered_map<const Parameter*, Eigen::MatrixXd> gradients() const;

  std::size_t size() const { return nodes_.size(); }
  void clear();

 private:
  struct Node {
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
    Backward backward;
    const Parameter* param = nullptr;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
  bool recording_ = true;
};

inline const Eigen::MatrixXd& Var::value() const { return tape_->value(id_); }

// Elementwise arithmetic on equal shapes.
Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator-(const Var& a);
Var operator*(double s, const Var& a);
Var operator+(const Var& a, double s);

Var matmul(const Var& a, const Var& b);
/// x (n x B) plus a column bias b (n x 1) broadcast over columns.
Var add_bias(const Var& x, const Var& b);
/// Repeats a column vector `cols` times.
Var broadcast_cols(const Var& v, Eigen::Index cols);

Var sigmoid(const Var& x);
Var tanh(const Var& x);
Var softplus(const Var& x);
Var exp(const Var& x);
Var log(const Var& x);

/// Sum of all entries as a 1 x 1 node.
Var sum(const Var& x);
Var slice_rows(const Var& x, Eigen::Index start, Eigen::Index count);
Var gather_rows(const Var& x, const std::vector<Eigen::Index>& rows);
Var concat_rows(const std::vector<Var>& parts);

/// Elementwise log Pois(counts | rate), log-factorial included.
Var poisson_log_pmf(const Var& rate, const Eigen::MatrixXd& counts);
/// Elementwise log N(x | mu, sigma^2) with x a constant.
Var gaussian_log_pdf(const Eigen::MatrixXd& x, const Var& mu, const Var& sigma);
/// Elementwise KL(N(mu_q, sigma_q^2) || N(mu_p, sigma_p^2)).
Var gaussian_kl(const Var& mu_q, const Var& sigma_q, const Var& mu_p, const Var& sigma_p);
/// mu + sigma * eps with eps a fixed standard-normal draw.
Var reparameterize(const Var& mu, const Var& sigma, const Eigen::MatrixXd& eps);

// Plain-matrix versions of the transforms, shared with the forward-only paths.
Eigen::MatrixXd softplus(const Eigen::MatrixXd& x);
Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x);
double log_poisson(double count, double rate);
double log_normal(double x, double mu, double sigma);

}  // namespace bikeinv::ad

#endif  // BIKEINV_AUTODIFF_HPP
