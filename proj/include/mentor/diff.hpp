#pragma once

// Dense reverse-mode differentiation over row-major matrices.
//
// A Tape records every primitive applied during one forward pass together with a pullback.
// backward() walks the record in exact reverse order and accumulates gradients additively,
// so a value used twice receives the sum of both contributions. Parameter leaves forward
// their gradient into Parameter::grad.
//
// Index arrays passed to gather/segment/softmax primitives are borrowed: they must outlive
// the tape.

#include <Eigen/Dense>

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace mentor::diff {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Index = std::int32_t;

enum class Reduce { Sum, Mean, Max, Min };
Reduce reduce_from_string(const std::string& name);
const char* to_string(Reduce mode);

template <typename T>
struct Parameter {
  std::string name;
  Mat<T> value;
  Mat<T> grad;
};

/// Named trainable tensors in registration order. Addresses are stable.
template <typename T>
class ParameterStore {
 public:
  Parameter<T>& add(const std::string& name, Mat<T> init);
  Parameter<T>& get(const std::string& name);
  const Parameter<T>& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::size_t size() const { return params_.size(); }
  std::size_t num_scalars() const;

  std::vector<Parameter<T>*> all();
  std::vector<const Parameter<T>*> all() const;
  void zero_grad();

 private:
  std::deque<Parameter<T>> params_;
};

template <typename T>
class Tape;

/// Handle to a recorded value.
template <typename T>
struct Var {
  Tape<T>* tape{nullptr};
  int id{-1};

  const Mat<T>& value() const { return tape->value(*this); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

template <typename T>
class Tape {
 public:
  using Pullback = std::function<void(Tape&, const Mat<T>& out_grad)>;

  /// With `record_gradients` off, parameters enter as constants and no pullbacks are kept.
  explicit Tape(bool record_gradients = true) : record_(record_gradients) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Mat<T> value);
  Var<T> param(Parameter<T>& p);

  const Mat<T>& value(Var<T> v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }
  /// Gradient of the last backward() w.r.t. v; zero matrix if v did not influence the loss.
  Mat<T> grad(Var<T> v) const;
  bool needs_grad(Var<T> v) const { return nodes_[static_cast<std::size_t>(v.id)].needs_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Seeds d(loss)/d(loss) = 1 for a 1x1 loss and runs every pullback in reverse order.
  void backward(Var<T> loss);

  // --- primitives -----------------------------------------------------------------------
  Var<T> matmul(Var<T> a, Var<T> b);
  Var<T> add(Var<T> a, Var<T> b);
  /// a + row (1 x cols) broadcast over rows.
  Var<T> add_row(Var<T> a, Var<T> row);
  Var<T> scale(Var<T> a, T factor);
  /// a * s for a 1x1 variable s.
  Var<T> scale_by(Var<T> a, Var<T> s);
  Var<T> add_constant(Var<T> a, T c);
  /// Row i of a multiplied by w(i); w is rows x 1.
  Var<T> mul_rows(Var<T> a, Var<T> w);
  Var<T> concat_cols(Var<T> a, Var<T> b);
  Var<T> column(Var<T> a, Eigen::Index col);
  /// Same row-major data viewed with a new shape.
  Var<T> reshape(Var<T> a, Eigen::Index rows, Eigen::Index cols);
  Var<T> leaky_relu(Var<T> a, T negative_slope = T(0.2));
  Var<T> relu(Var<T> a);
  /// Inverted dropout; identity when p == 0. Throws for p outside [0,1).
  Var<T> dropout(Var<T> a, double p, std::mt19937_64& rng);
  /// Rows picked by index (repeats allowed).
  Var<T> gather_rows(Var<T> a, std::span<const Index> rows);
  /// Rows of a reduced per segment id into num_segments rows; empty segments give 0.
  /// Max/min send the gradient to the first extreme row on ties.
  Var<T> segment_reduce(Var<T> a, std::span<const Index> segment, Index num_segments, Reduce mode);
  /// Softmax of a column vector within groups of equal id.
  Var<T> softmax_over_groups(Var<T> scores, std::span<const Index> group, Index num_groups);
  Var<T> softmax_rows(Var<T> a);
  /// Each row divided by max(||row||_2, eps).
  Var<T> l2_norm_clamp(Var<T> a, T eps);
  Var<T> sum(Var<T> a);
  Var<T> mean(Var<T> a);
  /// Mean negative log-likelihood of integer labels under softmax(logits).
  Var<T> cross_entropy(Var<T> logits, std::span<const int> labels);

  // convenience
  Var<T> linear(Var<T> x, Var<T> weight, Var<T> bias) { return add_row(matmul(x, weight), bias); }

 private:
  struct Node {
    Mat<T> value;
    Mat<T> grad;
    bool needs_grad{false};
    bool has_grad{false};
    Parameter<T>* param{nullptr};
    Pullback pullback;
  };

  Var<T> push(Mat<T> value, std::initializer_list<Var<T>> inputs, Pullback pullback);
  void accumulate(Var<T> v, const Mat<T>& g);
  template <typename Expr>
  void accumulate_expr(Var<T> v, const Expr& g);
  Node& node(Var<T> v) { return nodes_[static_cast<std::size_t>(v.id)]; }
  const Node& node(Var<T> v) const { return nodes_[static_cast<std::size_t>(v.id)]; }

  std::vector<Node> nodes_;
  bool record_{true};
};

/// Maximum over all parameter entries of |analytic - numeric| / max(|analytic|, |numeric|, floor),
/// with numeric gradients from central differences of step `step`. `loss` must build a 1x1 value.
/// The floor sits above the roundoff of the difference quotient (about eps * |loss| / step).
/// Entries whose forward and backward one-sided slopes disagree straddle a kink; they are
/// compared against the nearer matching one-sided slope instead.
double grad_check(const std::function<Var<double>(Tape<double>&)>& loss, ParameterStore<double>& params,
                  double step = 1e-5, double floor = 1e-6);

}  // namespace mentor::diff
