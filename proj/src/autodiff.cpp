#include "bikeinv/autodiff.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bikeinv::ad {

namespace {

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (&a.tape() != &b.tape()) throw std::invalid_argument(std::string(op) + ": vars on different tapes");
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
}

double softplus_scalar(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

constexpr double kHalfLog2Pi = 0.91893853320467274178;

}  // namespace

Var Tape::constant(Eigen::MatrixXd value) {
  nodes_.push_back({std::move(value), {}, {}, nullptr, false});
  return {this, nodes_.size() - 1};
}

Var Tape::parameter(const Parameter& p) {
  if (!recording_) return constant(p.value);
  nodes_.push_back({p.value, {}, {}, &p, true});
  return {this, nodes_.size() - 1};
}

void Tape::backward(const Var& loss) {
  if (loss.rows() != 1 || loss.cols() != 1) throw std::invalid_argument("backward needs a scalar loss");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  accumulate(loss.id(), Eigen::MatrixXd::Ones(1, 1));
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    auto& node = nodes_[i];
    if (node.backward && node.grad.size() != 0) node.backward(*this, i);
  }
}

std::unordered_map<const Parameter*, Eigen::MatrixXd> Tape::gradients() const {
  std::unordered_map<const Parameter*, Eigen::MatrixXd> out;
  for (const auto& node : nodes_) {
    if (!node.param) continue;
    auto [it, inserted] = out.try_emplace(node.param);
    if (inserted) it->second = Eigen::MatrixXd::Zero(node.value.rows(), node.value.cols());
    if (node.grad.size() != 0) it->second += node.grad;
  }
  return out;
}

void Tape::clear() { nodes_.clear(); }

Var operator+(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  const auto ia = a.id(), ib = b.id();
  return a.tape().push(a.value() + b.value(), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, t.grad(self));
  });
}

Var operator-(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  const auto ia = a.id(), ib = b.id();
  return a.tape().push(a.value() - b.value(), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, -t.grad(self));
  });
}

Var operator*(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  const auto ia = a.id(), ib = b.id();
  return a.tape().push(a.value().cwiseProduct(b.value()), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self).cwiseProduct(t.value(ib)));
    t.accumulate(ib, t.grad(self).cwiseProduct(t.value(ia)));
  });
}

Var operator-(const Var& a) { return -1.0 * a; }

Var operator*(double s, const Var& a) {
  const auto ia = a.id();
  return a.tape().push(s * a.value(), {a},
                       [ia, s](Tape& t, std::size_t self) { t.accumulate(ia, s * t.grad(self)); });
}

Var operator+(const Var& a, double s) {
  const auto ia = a.id();
  return a.tape().push((a.value().array() + s).matrix(), {a},
                       [ia](Tape& t, std::size_t self) { t.accumulate(ia, t.grad(self)); });
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  const auto ia = a.id(), ib = b.id();
  return a.tape().push(a.value() * b.value(), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    if (t.requires_grad(ia)) t.accumulate(ia, t.grad(self) * t.value(ib).transpose());
    if (t.requires_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * t.grad(self));
  });
}

Var add_bias(const Var& x, const Var& b) {
  if (b.cols() != 1 || b.rows() != x.rows()) throw std::invalid_argument("add_bias: bias shape");
  const auto ix = x.id(), ib = b.id();
  Eigen::MatrixXd v = x.value();
  v.colwise() += b.value().col(0);
  return x.tape().push(std::move(v), {x, b}, [ix, ib](Tape& t, std::size_t self) {
    t.accumulate(ix, t.grad(self));
    if (t.requires_grad(ib)) t.accumulate(ib, t.grad(self).rowwise().sum());
  });
}

Var broadcast_cols(const Var& v, Eigen::Index cols) {
  if (v.cols() != 1) throw std::invalid_argument("broadcast_cols: expected a column vector");
  const auto iv = v.id();
  return v.tape().push(v.value().replicate(1, cols), {v}, [iv](Tape& t, std::size_t self) {
    t.accumulate(iv, t.grad(self).rowwise().sum());
  });
}

Var sigmoid(const Var& x) {
  const auto ix = x.id();
  return x.tape().push(sigmoid(x.value()), {x}, [ix](Tape& t, std::size_t self) {
    const auto& y = t.value(self);
    t.accumulate(ix, t.grad(self).cwiseProduct((y.array() * (1.0 - y.array())).matrix()));
  });
}

Var tanh(const Var& x) {
  const auto ix = x.id();
  return x.tape().push(x.value().array().tanh().matrix(), {x}, [ix](Tape& t, std::size_t self) {
    const auto& y = t.value(self);
    t.accumulate(ix, t.grad(self).cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var softplus(const Var& x) {
  const auto ix = x.id();
  return x.tape().push(softplus(x.value()), {x}, [ix](Tape& t, std::size_t self) {
    t.accumulate(ix, t.grad(self).cwiseProduct(sigmoid(t.value(ix))));
  });
}

Var exp(const Var& x) {
  const auto ix = x.id();
  return x.tape().push(x.value().array().exp().matrix(), {x}, [ix](Tape& t, std::size_t self) {
    t.accumulate(ix, t.grad(self).cwiseProduct(t.value(self)));
  });
}

Var log(const Var& x) {
  const auto ix = x.id();
  return x.tape().push(x.value().array().log().matrix(), {x}, [ix](Tape& t, std::size_t self) {
    t.accumulate(ix, t.grad(self).cwiseQuotient(t.value(ix)));
  });
}

Var sum(const Var& x) {
  const auto ix = x.id();
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = x.value().sum();
  return x.tape().push(std::move(v), {x}, [ix](Tape& t, std::size_t self) {
    const auto& xv = t.value(ix);
    t.accumulate(ix, Eigen::MatrixXd::Constant(xv.rows(), xv.cols(), t.grad(self)(0, 0)));
  });
}

Var slice_rows(const Var& x, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > x.rows()) throw std::invalid_argument("slice_rows: out of range");
  const auto ix = x.id();
  return x.tape().push(x.value().middleRows(start, count), {x},
                       [ix, start, count](Tape& t, std::size_t self) {
                         const auto& xv = t.value(ix);
                         Eigen::MatrixXd g = Eigen::MatrixXd::Zero(xv.rows(), xv.cols());
                         g.middleRows(start, count) = t.grad(self);
                         t.accumulate(ix, g);
                       });
}

Var gather_rows(const Var& x, const std::vector<Eigen::Index>& rows) {
  const auto ix = x.id();
  Eigen::MatrixXd v(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= x.rows()) throw std::invalid_argument("gather_rows: index out of range");
    v.row(static_cast<Eigen::Index>(i)) = x.value().row(rows[i]);
  }
  return x.tape().push(std::move(v), {x}, [ix, rows](Tape& t, std::size_t self) {
    const auto& xv = t.value(ix);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(xv.rows(), xv.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) g.row(rows[i]) += t.grad(self).row(static_cast<Eigen::Index>(i));
    t.accumulate(ix, g);
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts.front().cols();
  for (const auto& p : parts) {
    if (p.cols() != cols) throw std::invalid_argument("concat_rows: column mismatch");
    rows += p.rows();
  }
  Eigen::MatrixXd v(rows, cols);
  std::vector<std::pair<std::size_t, Eigen::Index>> layout;
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    v.middleRows(at, p.rows()) = p.value();
    layout.emplace_back(p.id(), at);
    at += p.rows();
  }
  return parts.front().tape().push(std::move(v), parts, [layout](Tape& t, std::size_t self) {
    for (const auto& [id, offset] : layout)
      if (t.requires_grad(id)) t.accumulate(id, t.grad(self).middleRows(offset, t.value(id).rows()));
  });
}

Var poisson_log_pmf(const Var& rate, const Eigen::MatrixXd& counts) {
  if (rate.rows() != counts.rows() || rate.cols() != counts.cols())
    throw std::invalid_argument("poisson_log_pmf: shape mismatch");
  const auto ir = rate.id();
  const auto& r = rate.value();
  Eigen::MatrixXd v(r.rows(), r.cols());
  for (Eigen::Index i = 0; i < r.size(); ++i) v(i) = log_poisson(counts(i), r(i));
  return rate.tape().push(std::move(v), {rate}, [ir, counts](Tape& t, std::size_t self) {
    const auto& rv = t.value(ir);
    t.accumulate(ir, t.grad(self).cwiseProduct((counts.array() / rv.array() - 1.0).matrix()));
  });
}

Var gaussian_log_pdf(const Eigen::MatrixXd& x, const Var& mu, const Var& sigma) {
  check_same_shape(mu, sigma, "gaussian_log_pdf");
  const auto im = mu.id(), is = sigma.id();
  const auto z = ((x - mu.value()).array() / sigma.value().array()).eval();
  Eigen::MatrixXd v = (-kHalfLog2Pi - sigma.value().array().log() - 0.5 * z.square()).matrix();
  return mu.tape().push(std::move(v), {mu, sigma}, [im, is, x](Tape& t, std::size_t self) {
    const auto& s = t.value(is).array();
    const auto d = (x - t.value(im)).array().eval();
    const auto& g = t.grad(self).array();
    t.accumulate(im, (g * d / s.square()).matrix());
    t.accumulate(is, (g * (-1.0 / s + d.square() / (s * s * s))).matrix());
  });
}

Var gaussian_kl(const Var& mu_q, const Var& sigma_q, const Var& mu_p, const Var& sigma_p) {
  check_same_shape(mu_q, sigma_q, "gaussian_kl");
  check_same_shape(mu_q, mu_p, "gaussian_kl");
  check_same_shape(mu_q, sigma_p, "gaussian_kl");
  const auto iq = mu_q.id(), isq = sigma_q.id(), ip = mu_p.id(), isp = sigma_p.id();
  const auto sq = sigma_q.value().array();
  const auto sp = sigma_p.value().array();
  const auto diff = (mu_q.value() - mu_p.value()).array();
  Eigen::MatrixXd v =
      ((sp / sq).log() + (sq.square() + diff.square()) / (2.0 * sp.square()) - 0.5).matrix();
  return mu_q.tape().push(std::move(v), {mu_q, sigma_q, mu_p, sigma_p},
                          [iq, isq, ip, isp](Tape& t, std::size_t self) {
                            const auto g = t.grad(self).array();
                            const auto s_q = t.value(isq).array();
                            const auto s_p = t.value(isp).array();
                            const auto d = (t.value(iq) - t.value(ip)).array().eval();
                            const auto dmu = (g * d / s_p.square()).eval();
                            t.accumulate(iq, dmu.matrix());
                            t.accumulate(ip, (-dmu).matrix());
                            t.accumulate(isq, (g * (-1.0 / s_q + s_q / s_p.square())).matrix());
                            t.accumulate(isp, (g * (1.0 / s_p - (s_q.square() + d.square()) /
                                                                    (s_p * s_p * s_p)))
                                                  .matrix());
                          });
}

Var reparameterize(const Var& mu, const Var& sigma, const Eigen::MatrixXd& eps) {
  check_same_shape(mu, sigma, "reparameterize");
  if (eps.rows() != mu.rows() || eps.cols() != mu.cols())
    throw std::invalid_argument("reparameterize: noise shape mismatch");
  const auto im = mu.id(), is = sigma.id();
  return mu.tape().push(mu.value() + sigma.value().cwiseProduct(eps), {mu, sigma},
                        [im, is, eps](Tape& t, std::size_t self) {
                          t.accumulate(im, t.grad(self));
                          t.accumulate(is, t.grad(self).cwiseProduct(eps));
                        });
}

Eigen::MatrixXd softplus(const Eigen::MatrixXd& x) { return x.unaryExpr(&softplus_scalar); }

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) { return x.unaryExpr(&sigmoid_scalar); }

double log_poisson(double count, double rate) {
  const double term = count == 0.0 ? 0.0 : count * std::log(rate);
  return term - rate - std::lgamma(count + 1.0);
}

double log_normal(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -kHalfLog2Pi - std::log(sigma) - 0.5 * z * z;
}

}  // namespace bikeinv::ad
