#include "mentor/diff.hpp"
#include "mentor/error.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <functional>

using namespace mentor::diff;
using M = Mat<double>;

namespace {

M random(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  M m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(rng);
  return m;
}

// Reduces any output to a scalar through a fixed random projection so every entry matters.
Var<double> project(Tape<double>& t, Var<double> y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto w = t.constant(random(y.rows(), y.cols(), rng));
  const auto n = y.rows() * y.cols();
  return t.sum(t.mul_rows(t.reshape(y, n, 1), t.reshape(w, n, 1)));
}

double check(const std::function<Var<double>(Tape<double>&, std::vector<Var<double>>&)>& f,
             std::vector<M> inputs) {
  ParameterStore<double> ps;
  for (std::size_t i = 0; i < inputs.size(); ++i) ps.add("x" + std::to_string(i), inputs[i]);
  return grad_check(
      [&](Tape<double>& t) {
        std::vector<Var<double>> xs;
        for (auto* p : ps.all()) xs.push_back(t.param(*p));
        return project(t, f(t, xs), 99);
      },
      ps);
}

const std::vector<Index> kSeg{0, 2, 0, 1, 2};
const std::vector<Index> kGather{4, 0, 0, 3};

}  // namespace

TEST_CASE("every primitive matches finite differences on random 5x4 inputs") {
  std::mt19937_64 rng(42);
  using Fn = std::function<Var<double>(Tape<double>&, std::vector<Var<double>>&)>;
  std::vector<std::pair<std::string, std::pair<Fn, std::vector<M>>>> cases;
  auto x = [&] { return random(5, 4, rng); };
  cases.push_back({"matmul", {[](auto& t, auto& v) { return t.matmul(v[0], v[1]); }, {x(), random(4, 3, rng)}}});
  cases.push_back({"add", {[](auto& t, auto& v) { return t.add(v[0], v[1]); }, {x(), x()}}});
  cases.push_back({"add_row", {[](auto& t, auto& v) { return t.add_row(v[0], v[1]); }, {x(), random(1, 4, rng)}}});
  cases.push_back({"scale", {[](auto& t, auto& v) { return t.scale(v[0], -1.7); }, {x()}}});
  cases.push_back({"scale_by", {[](auto& t, auto& v) { return t.scale_by(v[0], v[1]); }, {x(), random(1, 1, rng)}}});
  cases.push_back({"add_constant", {[](auto& t, auto& v) { return t.add_constant(v[0], 0.3); }, {x()}}});
  cases.push_back({"mul_rows", {[](auto& t, auto& v) { return t.mul_rows(v[0], v[1]); }, {x(), random(5, 1, rng)}}});
  cases.push_back({"concat_cols", {[](auto& t, auto& v) { return t.concat_cols(v[0], v[1]); }, {x(), random(5, 2, rng)}}});
  cases.push_back({"column", {[](auto& t, auto& v) { return t.column(v[0], 2); }, {x()}}});
  cases.push_back({"reshape", {[](auto& t, auto& v) { return t.reshape(v[0], 2, 10); }, {x()}}});
  cases.push_back({"leaky_relu", {[](auto& t, auto& v) { return t.leaky_relu(v[0]); }, {x()}}});
  cases.push_back({"relu", {[](auto& t, auto& v) { return t.relu(v[0]); }, {x()}}});
  cases.push_back({"gather_rows", {[](auto& t, auto& v) { return t.gather_rows(v[0], kGather); }, {x()}}});
  for (auto mode : {Reduce::Sum, Reduce::Mean, Reduce::Max, Reduce::Min}) {
    cases.push_back({std::string("segment_") + to_string(mode),
                     {[mode](auto& t, auto& v) { return t.segment_reduce(v[0], kSeg, 4, mode); }, {x()}}});
  }
  cases.push_back({"softmax_over_groups",
                   {[](auto& t, auto& v) { return t.softmax_over_groups(t.column(v[0], 1), kSeg, 3); }, {x()}}});
  cases.push_back({"softmax_rows", {[](auto& t, auto& v) { return t.softmax_rows(v[0]); }, {x()}}});
  cases.push_back({"l2_norm_clamp", {[](auto& t, auto& v) { return t.l2_norm_clamp(v[0], 1e-12); }, {x()}}});
  cases.push_back({"sum", {[](auto& t, auto& v) { return t.sum(v[0]); }, {x()}}});
  cases.push_back({"mean", {[](auto& t, auto& v) { return t.mean(v[0]); }, {x()}}});
  cases.push_back({"cross_entropy", {[](auto& t, auto& v) {
                                       static const std::vector<int> labels{0, 3, 1, 1, 2};
                                       return t.cross_entropy(v[0], labels);
                                     },
                                     {x()}}});
  cases.push_back({"linear", {[](auto& t, auto& v) { return t.linear(v[0], v[1], v[2]); },
                              {x(), random(4, 2, rng), random(1, 2, rng)}}});
  for (auto& [name, c] : cases) {
    const double err = check(c.first, c.second);
    CHECK_MESSAGE(err < 1e-4, name << " relative error " << err);
  }
}

TEST_CASE("quadratic has the closed-form gradient") {
  ParameterStore<double> ps;
  M e1 = M::Zero(3, 1);
  e1(0, 0) = 1.0;
  auto& p = ps.add("x", e1);
  Tape<double> t;
  auto xv = t.param(p);
  auto loss = t.sum(t.mul_rows(xv, xv));
  t.backward(loss);
  CHECK(std::abs(p.grad(0, 0) - 2.0) < 1e-8);
  CHECK(p.grad(1, 0) == 0.0);
  const double err = grad_check(
      [&](Tape<double>& tape) {
        auto v = tape.param(p);
        return tape.sum(tape.mul_rows(v, v));
      },
      ps);
  CHECK(err < 1e-8);
}

TEST_CASE("gradients accumulate over shared inputs") {
  ParameterStore<double> ps;
  auto& p = ps.add("x", M::Constant(2, 2, 3.0));
  Tape<double> t;
  auto v = t.param(p);
  auto loss = t.sum(t.add(v, t.add(v, v)));
  t.backward(loss);
  CHECK(p.grad == M::Constant(2, 2, 3.0));
  // a second backward on a fresh tape adds into the same buffer until zero_grad
  Tape<double> t2;
  auto w = t2.param(p);
  t2.backward(t2.sum(w));
  CHECK(p.grad == M::Constant(2, 2, 4.0));
  ps.zero_grad();
  CHECK(p.grad.isZero());
}

TEST_CASE("no-gradient tapes treat parameters as constants") {
  ParameterStore<double> ps;
  auto& p = ps.add("x", M::Ones(2, 2));
  Tape<double> t(false);
  auto v = t.param(p);
  CHECK_FALSE(t.needs_grad(v));
  auto y = t.relu(t.scale(v, 2.0));
  CHECK(y.value() == M::Constant(2, 2, 2.0));
}

TEST_CASE("segment reduce equals the loop oracle") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> seg_pick(0, 6);
  for (int rep = 0; rep < 30; ++rep) {
    const int rows = 1 + rep;
    M a = random(rows, 3, rng);
    std::vector<Index> seg(static_cast<std::size_t>(rows));
    std::vector<int> seg_int(seg.size());
    for (std::size_t i = 0; i < seg.size(); ++i) seg_int[i] = seg[i] = seg_pick(rng);
    const std::pair<Reduce, oracle::Mode> modes[] = {{Reduce::Sum, oracle::Mode::Sum},
                                                     {Reduce::Mean, oracle::Mode::Mean},
                                                     {Reduce::Max, oracle::Mode::Max},
                                                     {Reduce::Min, oracle::Mode::Min}};
    for (auto [mode, omode] : modes) {
      Tape<double> t(false);
      auto out = t.segment_reduce(t.constant(a), seg, 8, mode);
      const Eigen::MatrixXd expect = oracle::segment_reduce(a, seg_int, 8, omode);
      CHECK((out.value() - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  Tape<double> t(false);
  M a = random(4, 2, rng);
  const std::vector<Index> one(4, 0);
  auto s = t.segment_reduce(t.constant(a), one, 1, Reduce::Sum);
  CHECK((s.value() - a.colwise().sum()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("softmax over groups") {
  Tape<double> t(false);
  const std::vector<Index> groups{0, 0, 0};
  auto a = t.softmax_over_groups(t.constant(M::Constant(3, 1, 4.2)), groups, 1);
  for (int i = 0; i < 3; ++i) CHECK(a.value()(i, 0) == doctest::Approx(1.0 / 3.0));

  std::mt19937_64 rng(3);
  std::vector<Index> g;
  std::uniform_int_distribution<Index> pick(0, 9);
  for (int i = 0; i < 60; ++i) g.push_back(pick(rng));
  auto s = t.softmax_over_groups(t.constant(random(60, 1, rng) * 30.0), g, 10);
  std::vector<double> sums(10, 0.0);
  for (int i = 0; i < 60; ++i) sums[static_cast<std::size_t>(g[static_cast<std::size_t>(i)])] += s.value()(i, 0);
  for (Index k = 0; k < 10; ++k) {
    if (std::find(g.begin(), g.end(), k) != g.end()) CHECK(std::abs(sums[static_cast<std::size_t>(k)] - 1.0) < 1e-12);
  }
}

TEST_CASE("norm clamp") {
  Tape<double> t(false);
  M x(3, 2);
  x << 3, 4, 0, 0, 1e-14, 0;
  auto y = t.l2_norm_clamp(t.constant(x), 1e-12);
  CHECK(y.value()(0, 0) == doctest::Approx(0.6));
  CHECK(y.value()(0, 1) == doctest::Approx(0.8));
  CHECK(y.value().row(1).isZero());
  CHECK(y.value()(2, 0) == doctest::Approx(1e-2));  // divided by eps, not by the norm
}

TEST_CASE("dropout") {
  std::mt19937_64 rng(1);
  Tape<double> t(false);
  auto x = t.constant(M::Ones(200, 50));
  auto same = t.dropout(x, 0.0, rng);
  CHECK(same.value() == x.value());
  auto d = t.dropout(x, 0.5, rng);
  const double kept = (d.value().array() != 0.0).cast<double>().mean();
  CHECK(kept == doctest::Approx(0.5).epsilon(0.05));
  CHECK(d.value().sum() / d.value().size() == doctest::Approx(1.0).epsilon(0.05));
  CHECK_THROWS_AS(t.dropout(x, 1.0, rng), mentor::ValidationError);
}

TEST_CASE("float tapes agree with double tapes") {
  std::mt19937_64 rng(2);
  M a = random(5, 4, rng), b = random(4, 3, rng);
  Tape<double> td(false);
  Tape<float> tf(false);
  auto yd = td.softmax_rows(td.matmul(td.constant(a), td.constant(b)));
  auto yf = tf.softmax_rows(tf.matmul(tf.constant(a.cast<float>()), tf.constant(b.cast<float>())));
  CHECK((yd.value().cast<float>() - yf.value()).cwiseAbs().maxCoeff() < 1e-5f);
}
