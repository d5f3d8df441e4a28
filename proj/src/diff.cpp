#include "mentor/diff.hpp"

#include "mentor/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

namespace mentor::diff {

Reduce reduce_from_string(const std::string& name) {
  if (name == "sum") return Reduce::Sum;
  if (name == "mean") return Reduce::Mean;
  if (name == "max") return Reduce::Max;
  if (name == "min") return Reduce::Min;
  throw ValidationError("unknown reduction '" + name + "'");
}

const char* to_string(Reduce mode) {
  switch (mode) {
    case Reduce::Sum: return "sum";
    case Reduce::Mean: return "mean";
    case Reduce::Max: return "max";
    case Reduce::Min: return "min";
  }
  return "?";
}

// ---------------------------------------------------------------------------------------
// ParameterStore

template <typename T>
Parameter<T>& ParameterStore<T>::add(const std::string& name, Mat<T> init) {
  if (contains(name)) throw ValidationError("duplicate parameter '" + name + "'");
  Mat<T> zero = Mat<T>::Zero(init.rows(), init.cols());
  params_.push_back({name, std::move(init), std::move(zero)});
  return params_.back();
}

template <typename T>
Parameter<T>& ParameterStore<T>::get(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw ValidationError("unknown parameter '" + name + "'");
}

template <typename T>
const Parameter<T>& ParameterStore<T>::get(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p;
  }
  throw ValidationError("unknown parameter '" + name + "'");
}

template <typename T>
bool ParameterStore<T>::contains(const std::string& name) const {
  return std::any_of(params_.begin(), params_.end(), [&](const auto& p) { return p.name == name; });
}

template <typename T>
std::size_t ParameterStore<T>::num_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

template <typename T>
std::vector<Parameter<T>*> ParameterStore<T>::all() {
  std::vector<Parameter<T>*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

template <typename T>
std::vector<const Parameter<T>*> ParameterStore<T>::all() const {
  std::vector<const Parameter<T>*> out;
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& p : params_) p.grad.setZero(p.value.rows(), p.value.cols());
}

// ---------------------------------------------------------------------------------------
// Tape core

template <typename T>
Var<T> Tape<T>::constant(Mat<T> value) {
  nodes_.push_back(Node{std::move(value), {}, false, false, nullptr, {}});
  return {this, static_cast<int>(nodes_.size() - 1)};
}

template <typename T>
Var<T> Tape<T>::param(Parameter<T>& p) {
  if (!record_) return constant(p.value);
  nodes_.push_back(Node{p.value, {}, true, false, &p, {}});
  return {this, static_cast<int>(nodes_.size() - 1)};
}

template <typename T>
Var<T> Tape<T>::push(Mat<T> value, std::initializer_list<Var<T>> inputs, Pullback pullback) {
  bool needs = false;
  for (auto v : inputs) needs = needs || node(v).needs_grad;
  nodes_.push_back(Node{std::move(value), {}, needs, false, nullptr, needs ? std::move(pullback) : Pullback{}});
  return {this, static_cast<int>(nodes_.size() - 1)};
}

template <typename T>
void Tape<T>::accumulate(Var<T> v, const Mat<T>& g) {
  accumulate_expr(v, g);
}

template <typename T>
template <typename Expr>
void Tape<T>::accumulate_expr(Var<T> v, const Expr& g) {
  Node& n = node(v);
  if (!n.needs_grad) return;
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

template <typename T>
Mat<T> Tape<T>::grad(Var<T> v) const {
  const Node& n = node(v);
  if (n.has_grad) return n.grad;
  return Mat<T>::Zero(n.value.rows(), n.value.cols());
}

template <typename T>
void Tape<T>::backward(Var<T> loss) {
  if (value(loss).size() != 1) throw ValidationError("backward() needs a scalar loss");
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad.resize(0, 0);
  }
  accumulate(loss, Mat<T>::Ones(1, 1));
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.has_grad) continue;
    if (n.pullback) n.pullback(*this, n.grad);
    if (n.param) {
      if (n.param->grad.rows() != n.value.rows() || n.param->grad.cols() != n.value.cols()) {
        n.param->grad.setZero(n.value.rows(), n.value.cols());
      }
      n.param->grad += n.grad;
    }
  }
}

namespace {

template <typename T>
void require(bool ok, const char* what) {
  if (!ok) throw ValidationError(std::string("shape mismatch: ") + what);
}

}  // namespace

// ---------------------------------------------------------------------------------------
// Primitives

template <typename T>
Var<T> Tape<T>::matmul(Var<T> a, Var<T> b) {
  require<T>(a.cols() == b.rows(), "matmul");
  Mat<T> out = value(a) * value(b);
  return push(std::move(out), {a, b}, [a, b](Tape& t, const Mat<T>& g) {
    if (t.node(a).needs_grad) t.accumulate_expr(a, g * t.value(b).transpose());
    if (t.node(b).needs_grad) t.accumulate_expr(b, t.value(a).transpose() * g);
  });
}

template <typename T>
Var<T> Tape<T>::add(Var<T> a, Var<T> b) {
  require<T>(a.rows() == b.rows() && a.cols() == b.cols(), "add");
  Mat<T> out = value(a) + value(b);
  return push(std::move(out), {a, b}, [a, b](Tape& t, const Mat<T>& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

template <typename T>
Var<T> Tape<T>::add_row(Var<T> a, Var<T> row) {
  require<T>(row.rows() == 1 && row.cols() == a.cols(), "add_row");
  Mat<T> out = value(a).rowwise() + value(row).row(0);
  return push(std::move(out), {a, row}, [a, row](Tape& t, const Mat<T>& g) {
    t.accumulate(a, g);
    if (t.node(row).needs_grad) t.accumulate_expr(row, g.colwise().sum());
  });
}

template <typename T>
Var<T> Tape<T>::scale(Var<T> a, T factor) {
  Mat<T> out = value(a) * factor;
  return push(std::move(out), {a}, [a, factor](Tape& t, const Mat<T>& g) { t.accumulate_expr(a, g * factor); });
}

template <typename T>
Var<T> Tape<T>::scale_by(Var<T> a, Var<T> s) {
  require<T>(s.rows() == 1 && s.cols() == 1, "scale_by");
  const T factor = value(s)(0, 0);
  Mat<T> out = value(a) * factor;
  return push(std::move(out), {a, s}, [a, s](Tape& t, const Mat<T>& g) {
    const T f = t.value(s)(0, 0);
    if (t.node(a).needs_grad) t.accumulate_expr(a, g * f);
    if (t.node(s).needs_grad) {
      Mat<T> gs(1, 1);
      gs(0, 0) = g.cwiseProduct(t.value(a)).sum();
      t.accumulate(s, gs);
    }
  });
}

template <typename T>
Var<T> Tape<T>::add_constant(Var<T> a, T c) {
  Mat<T> out = value(a).array() + c;
  return push(std::move(out), {a}, [a](Tape& t, const Mat<T>& g) { t.accumulate(a, g); });
}

template <typename T>
Var<T> Tape<T>::mul_rows(Var<T> a, Var<T> w) {
  require<T>(w.cols() == 1 && w.rows() == a.rows(), "mul_rows");
  Mat<T> out = value(w).col(0).asDiagonal() * value(a);
  return push(std::move(out), {a, w}, [a, w](Tape& t, const Mat<T>& g) {
    if (t.node(a).needs_grad) t.accumulate_expr(a, t.value(w).col(0).asDiagonal() * g);
    if (t.node(w).needs_grad) t.accumulate_expr(w, g.cwiseProduct(t.value(a)).rowwise().sum());
  });
}

template <typename T>
Var<T> Tape<T>::concat_cols(Var<T> a, Var<T> b) {
  require<T>(a.rows() == b.rows(), "concat_cols");
  Mat<T> out(a.rows(), a.cols() + b.cols());
  out << value(a), value(b);
  const auto ca = a.cols();
  const auto cb = b.cols();
  return push(std::move(out), {a, b}, [a, b, ca, cb](Tape& t, const Mat<T>& g) {
    if (t.node(a).needs_grad) t.accumulate_expr(a, g.leftCols(ca));
    if (t.node(b).needs_grad) t.accumulate_expr(b, g.rightCols(cb));
  });
}

template <typename T>
Var<T> Tape<T>::column(Var<T> a, Eigen::Index col) {
  require<T>(col >= 0 && col < a.cols(), "column");
  Mat<T> out = value(a).col(col);
  return push(std::move(out), {a}, [a, col](Tape& t, const Mat<T>& g) {
    Mat<T> full = Mat<T>::Zero(t.value(a).rows(), t.value(a).cols());
    full.col(col) = g.col(0);
    t.accumulate(a, full);
  });
}

template <typename T>
Var<T> Tape<T>::reshape(Var<T> a, Eigen::Index rows, Eigen::Index cols) {
  require<T>(rows * cols == value(a).size(), "reshape");
  Mat<T> out = Eigen::Map<const Mat<T>>(value(a).data(), rows, cols);
  const auto ra = a.rows();
  const auto ca = a.cols();
  return push(std::move(out), {a}, [a, ra, ca](Tape& t, const Mat<T>& g) {
    t.accumulate_expr(a, Eigen::Map<const Mat<T>>(g.data(), ra, ca));
  });
}

template <typename T>
Var<T> Tape<T>::leaky_relu(Var<T> a, T slope) {
  Mat<T> out = value(a).unaryExpr([slope](T x) { return x > T(0) ? x : slope * x; });
  return push(std::move(out), {a}, [a, slope](Tape& t, const Mat<T>& g) {
    Mat<T> d = t.value(a).unaryExpr([slope](T x) { return x > T(0) ? T(1) : slope; });
    t.accumulate_expr(a, g.cwiseProduct(d));
  });
}

template <typename T>
Var<T> Tape<T>::relu(Var<T> a) {
  Mat<T> out = value(a).cwiseMax(T(0));
  return push(std::move(out), {a}, [a](Tape& t, const Mat<T>& g) {
    Mat<T> d = t.value(a).unaryExpr([](T x) { return x > T(0) ? T(1) : T(0); });
    t.accumulate_expr(a, g.cwiseProduct(d));
  });
}

template <typename T>
Var<T> Tape<T>::dropout(Var<T> a, double p, std::mt19937_64& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ValidationError("dropout probability must be in [0,1)");
  if (p == 0.0) return a;
  std::bernoulli_distribution keep(1.0 - p);
  const T kept = T(1.0 / (1.0 - p));
  Mat<T> mask(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? kept : T(0);
  Mat<T> out = value(a).cwiseProduct(mask);
  return push(std::move(out), {a}, [a, mask = std::move(mask)](Tape& t, const Mat<T>& g) {
    t.accumulate_expr(a, g.cwiseProduct(mask));
  });
}

template <typename T>
Var<T> Tape<T>::gather_rows(Var<T> a, std::span<const Index> rows) {
  const auto& src = value(a);
  Mat<T> out(static_cast<Eigen::Index>(rows.size()), src.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require<T>(rows[i] >= 0 && rows[i] < src.rows(), "gather_rows index");
    out.row(static_cast<Eigen::Index>(i)) = src.row(rows[i]);
  }
  return push(std::move(out), {a}, [a, rows](Tape& t, const Mat<T>& g) {
    Mat<T> ga = Mat<T>::Zero(t.value(a).rows(), t.value(a).cols());
    for (std::size_t i = 0; i < rows.size(); ++i) ga.row(rows[i]) += g.row(static_cast<Eigen::Index>(i));
    t.accumulate(a, ga);
  });
}

template <typename T>
Var<T> Tape<T>::segment_reduce(Var<T> a, std::span<const Index> segment, Index num_segments, Reduce mode) {
  const auto& x = value(a);
  require<T>(static_cast<Eigen::Index>(segment.size()) == x.rows(), "segment_reduce ids");
  const Eigen::Index cols = x.cols();
  Mat<T> out = Mat<T>::Zero(num_segments, cols);
  std::vector<T> count(static_cast<std::size_t>(num_segments), T(0));
  for (auto s : segment) {
    require<T>(s >= 0 && s < num_segments, "segment id");
    count[static_cast<std::size_t>(s)] += T(1);
  }

  if (mode == Reduce::Sum || mode == Reduce::Mean) {
    for (std::size_t i = 0; i < segment.size(); ++i) out.row(segment[i]) += x.row(static_cast<Eigen::Index>(i));
    if (mode == Reduce::Mean) {
      for (Index s = 0; s < num_segments; ++s) {
        if (count[static_cast<std::size_t>(s)] > T(0)) out.row(s) /= count[static_cast<std::size_t>(s)];
      }
    }
    return push(std::move(out), {a}, [a, segment, mode, count = std::move(count)](Tape& t, const Mat<T>& g) {
      Mat<T> ga(static_cast<Eigen::Index>(segment.size()), g.cols());
      for (std::size_t i = 0; i < segment.size(); ++i) {
        const auto s = segment[i];
        ga.row(static_cast<Eigen::Index>(i)) = mode == Reduce::Mean ? (g.row(s) / count[static_cast<std::size_t>(s)]).eval() : g.row(s).eval();
      }
      t.accumulate(a, ga);
    });
  }

  // max / min: remember which row won each (segment, column).
  const bool is_max = mode == Reduce::Max;
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> arg =
      Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Constant(num_segments, cols, -1);
  for (std::size_t i = 0; i < segment.size(); ++i) {
    const auto s = segment[i];
    for (Eigen::Index c = 0; c < cols; ++c) {
      const T v = x(static_cast<Eigen::Index>(i), c);
      const Index cur = arg(s, c);
      if (cur < 0 || (is_max ? v > x(cur, c) : v < x(cur, c))) {
        arg(s, c) = static_cast<Index>(i);
        out(s, c) = v;
      }
    }
  }
  return push(std::move(out), {a}, [a, arg = std::move(arg)](Tape& t, const Mat<T>& g) {
    Mat<T> ga = Mat<T>::Zero(t.value(a).rows(), t.value(a).cols());
    for (Eigen::Index s = 0; s < arg.rows(); ++s) {
      for (Eigen::Index c = 0; c < arg.cols(); ++c) {
        if (arg(s, c) >= 0) ga(arg(s, c), c) += g(s, c);
      }
    }
    t.accumulate(a, ga);
  });
}

template <typename T>
Var<T> Tape<T>::softmax_over_groups(Var<T> scores, std::span<const Index> group, Index num_groups) {
  const auto& x = value(scores);
  require<T>(x.cols() == 1 && static_cast<Eigen::Index>(group.size()) == x.rows(), "softmax_over_groups");
  std::vector<T> gmax(static_cast<std::size_t>(num_groups), -std::numeric_limits<T>::infinity());
  for (std::size_t i = 0; i < group.size(); ++i) {
    require<T>(group[i] >= 0 && group[i] < num_groups, "group id");
    auto& m = gmax[static_cast<std::size_t>(group[i])];
    m = std::max(m, x(static_cast<Eigen::Index>(i), 0));
  }
  Mat<T> out(x.rows(), 1);
  std::vector<T> gsum(static_cast<std::size_t>(num_groups), T(0));
  for (std::size_t i = 0; i < group.size(); ++i) {
    const auto gi = static_cast<std::size_t>(group[i]);
    out(static_cast<Eigen::Index>(i), 0) = std::exp(x(static_cast<Eigen::Index>(i), 0) - gmax[gi]);
    gsum[gi] += out(static_cast<Eigen::Index>(i), 0);
  }
  for (std::size_t i = 0; i < group.size(); ++i) out(static_cast<Eigen::Index>(i), 0) /= gsum[static_cast<std::size_t>(group[i])];
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), {scores}, [scores, group, num_groups, self](Tape& t, const Mat<T>& g) {
    const auto& y = t.nodes_[static_cast<std::size_t>(self)].value;
    std::vector<T> dot(static_cast<std::size_t>(num_groups), T(0));
    for (std::size_t i = 0; i < group.size(); ++i) {
      dot[static_cast<std::size_t>(group[i])] += g(static_cast<Eigen::Index>(i), 0) * y(static_cast<Eigen::Index>(i), 0);
    }
    Mat<T> gs(y.rows(), 1);
    for (std::size_t i = 0; i < group.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      gs(r, 0) = y(r, 0) * (g(r, 0) - dot[static_cast<std::size_t>(group[i])]);
    }
    t.accumulate(scores, gs);
  });
}

template <typename T>
Var<T> Tape<T>::softmax_rows(Var<T> a) {
  const auto& x = value(a);
  Mat<T> out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const T m = x.row(r).maxCoeff();
    out.row(r) = (x.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), {a}, [a, self](Tape& t, const Mat<T>& g) {
    const auto& y = t.nodes_[static_cast<std::size_t>(self)].value;
    Mat<T> dot = g.cwiseProduct(y).rowwise().sum();
    Mat<T> ga = y.cwiseProduct(g - dot.col(0).replicate(1, g.cols()));
    t.accumulate(a, ga);
  });
}

template <typename T>
Var<T> Tape<T>::l2_norm_clamp(Var<T> a, T eps) {
  const auto& x = value(a);
  Mat<T> out(x.rows(), x.cols());
  std::vector<T> denom(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const T norm = x.row(r).norm();
    denom[static_cast<std::size_t>(r)] = std::max(norm, eps);
    out.row(r) = x.row(r) / denom[static_cast<std::size_t>(r)];
  }
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), {a}, [a, self, eps, denom = std::move(denom)](Tape& t, const Mat<T>& g) {
    const auto& y = t.nodes_[static_cast<std::size_t>(self)].value;
    Mat<T> ga(g.rows(), g.cols());
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      const T d = denom[static_cast<std::size_t>(r)];
      if (d > eps) {
        ga.row(r) = (g.row(r) - y.row(r) * y.row(r).dot(g.row(r))) / d;
      } else {
        ga.row(r) = g.row(r) / d;
      }
    }
    t.accumulate(a, ga);
  });
}

template <typename T>
Var<T> Tape<T>::sum(Var<T> a) {
  Mat<T> out(1, 1);
  out(0, 0) = value(a).sum();
  return push(std::move(out), {a}, [a](Tape& t, const Mat<T>& g) {
    t.accumulate_expr(a, Mat<T>::Constant(t.value(a).rows(), t.value(a).cols(), g(0, 0)));
  });
}

template <typename T>
Var<T> Tape<T>::mean(Var<T> a) {
  const auto n = static_cast<T>(value(a).size());
  require<T>(n > 0, "mean of empty");
  return scale(sum(a), T(1) / n);
}

template <typename T>
Var<T> Tape<T>::cross_entropy(Var<T> logits, std::span<const int> labels) {
  const auto& x = value(logits);
  require<T>(static_cast<Eigen::Index>(labels.size()) == x.rows() && x.rows() > 0, "cross_entropy labels");
  Mat<T> prob(x.rows(), x.cols());
  T loss = 0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    require<T>(y >= 0 && y < x.cols(), "cross_entropy label range");
    const T m = x.row(r).maxCoeff();
    prob.row(r) = (x.row(r).array() - m).exp();
    const T z = prob.row(r).sum();
    prob.row(r) /= z;
    loss += -(x(r, y) - m - std::log(z));
  }
  const auto n = static_cast<T>(x.rows());
  Mat<T> out(1, 1);
  out(0, 0) = loss / n;
  return push(std::move(out), {logits}, [logits, labels, prob = std::move(prob), n](Tape& t, const Mat<T>& g) {
    Mat<T> ga = prob;
    for (Eigen::Index r = 0; r < ga.rows(); ++r) ga(r, labels[static_cast<std::size_t>(r)]) -= T(1);
    t.accumulate_expr(logits, ga * (g(0, 0) / n));
  });
}

template class ParameterStore<float>;
template class ParameterStore<double>;
template class Tape<float>;
template class Tape<double>;

// ---------------------------------------------------------------------------------------

double grad_check(const std::function<Var<double>(Tape<double>&)>& loss, ParameterStore<double>& params, double step,
                  double floor) {
  params.zero_grad();
  double base = 0.0;
  {
    Tape<double> tape;
    auto l = loss(tape);
    if (l.value().size() != 1) throw ValidationError("grad_check needs a scalar function");
    base = l.value()(0, 0);
    tape.backward(l);
  }
  auto relative = [floor](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor}); };
  double worst = 0.0;
  long kinks = 0;
  for (auto* p : params.all()) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      double& x = p->value.data()[i];
      const double saved = x;
      auto at = [&](double offset) {
        x = saved + offset;
        Tape<double> tape;
        const double v = loss(tape).value()(0, 0);
        x = saved;
        return v;
      };
      const double up = at(step);
      const double down = at(-step);
      const double analytic = p->grad.data()[i];
      double err = relative(analytic, (up - down) / (2.0 * step));
      if (err > 1e-6) {
        // a ReLU kink inside [x - step, x + step] shows up as one-sided slopes that disagree
        const double forward = (-3.0 * base + 4.0 * up - at(2.0 * step)) / (2.0 * step);
        const double backward = (3.0 * base - 4.0 * down + at(-2.0 * step)) / (2.0 * step);
        if (relative(forward, backward) > 1e-2) {
          ++kinks;
          err = std::min(relative(analytic, forward), relative(analytic, backward));
        }
      }
      if (err > worst) {
        worst = err;
        spdlog::debug("grad_check {}[{}]: analytic {:.6e}, relative error {:.3e}", p->name, i, analytic, err);
      }
    }
  }
  if (kinks > 0) spdlog::debug("grad_check: {} entries straddle a kink and were compared one-sided", kinks);
  return worst;
}

}  // namespace mentor::diff
