// Copyright 2026 The mtlb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "doctest.h"
#include "mtlb/core/autodiff.hpp"
#include "mtlb/core/binary_io.hpp"
#include "mtlb/core/errors.hpp"
#include "mtlb/core/kv_config.hpp"
#include "mtlb/core/nn.hpp"
#include "test_util.hpp"

using namespace mtlb;
using mtlb::testing::max_abs_diff;
using mtlb::testing::op_gradient_error;
using mtlb::testing::random_tensor;

namespace
{

struct Fixture
{
  ParameterStore store;
  std::mt19937_64 rng{1234};
  ParamScope scope() { return ParamScope{&store, "t.", ParamGroup::Encoder, &rng}; }
};

// Naive single-head attention oracle on raw projected tensors.
Tensor attention_oracle(const Tensor & q, const Tensor & k, const Tensor & v, std::size_t heads)
{
  const std::size_t nq = q.rows(), nk = k.rows(), d = q.cols(), hd = d / heads;
  Tensor out({nq, d});
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < nq; ++i) {
      std::vector<double> s(nk);
      double mx = -1e300;
      for (std::size_t j = 0; j < nk; ++j) {
        double dot = 0.0;
        for (std::size_t c = 0; c < hd; ++c) dot += q.at(i, h * hd + c) * k.at(j, h * hd + c);
        s[j] = dot / std::sqrt(static_cast<double>(hd));
        mx = std::max(mx, s[j]);
      }
      double z = 0.0;
      for (auto & x : s) z += (x = std::exp(x - mx));
      for (std::size_t c = 0; c < hd; ++c) {
        double acc = 0.0;
        for (std::size_t j = 0; j < nk; ++j) acc += s[j] / z * v.at(j, h * hd + c);
        out.at(i, h * hd + c) = acc;
      }
    }
  }
  return out;
}

Tensor linear_oracle(const Tensor & x, const Tensor & w, const Tensor & b)
{
  Tensor y({x.rows(), w.cols()});
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < w.cols(); ++j) {
      double acc = b[j];
      for (std::size_t k = 0; k < x.cols(); ++k) acc += x.at(i, k) * w.at(k, j);
      y.at(i, j) = acc;
    }
  }
  return y;
}

Tensor attention_reference(
  const ParameterStore & store, const MultiHeadAttention & a, const Tensor & q, const Tensor & k, const Tensor & v)
{
  const auto pq = linear_oracle(q, store.value(a.query.weight), store.value(a.query.bias));
  const auto pk = linear_oracle(k, store.value(a.key.weight), store.value(a.key.bias));
  const auto pv = linear_oracle(v, store.value(a.value.weight), store.value(a.value.bias));
  const auto att = attention_oracle(pq, pk, pv, a.spec.heads);
  return linear_oracle(att, store.value(a.output.weight), store.value(a.output.bias));
}

}  // namespace

TEST_CASE("linear layer: identity, zero and triple-loop oracle")
{
  Fixture f;
  auto lin = Linear::create(f.scope(), 3, 3);
  auto & w = f.store.value(lin.weight);
  w.fill(0.0);
  for (std::size_t i = 0; i < 3; ++i) w.at(i, i) = 1.0;
  f.store.value(lin.bias).fill(0.0);
  const Tensor x = random_tensor({4, 3}, f.rng);
  {
    Graph g;
    CHECK(lin.forward(g, f.store, g.constant(x)).value() == x);
  }
  w.fill(0.0);
  {
    Graph g;
    const auto y = lin.forward(g, f.store, g.constant(x)).value();
    for (double v : y.data()) CHECK(v == 0.0);
  }
  auto lin2 = Linear::create(f.scope().sub("b"), 4, 2);
  const Tensor x2 = random_tensor({3, 4}, f.rng);
  Graph g;
  const auto y = lin2.forward(g, f.store, g.constant(x2)).value();
  const auto ref = linear_oracle(x2, f.store.value(lin2.weight), f.store.value(lin2.bias));
  CHECK(max_abs_diff(y, ref) < 1e-12);
}

TEST_CASE("attention: single token, identical keys and dense oracle")
{
  Fixture f;
  auto attn = MultiHeadAttention::create(f.scope(), AttentionSpec{8, 2}, 8, 8, 8);
  {
    const Tensor x = random_tensor({1, 8}, f.rng);
    Graph g;
    std::vector<Tensor> w;
    const auto y = mhsa(g, f.store, attn, g.constant(x), g.constant(x), g.constant(x), {}, &w).value();
    REQUIRE(w.size() == 2);
    for (const auto & h : w) CHECK(h[0] == 1.0);
    // Output is the projected value of the only token.
    const auto pv = linear_oracle(x, f.store.value(attn.value.weight), f.store.value(attn.value.bias));
    const auto ref = linear_oracle(pv, f.store.value(attn.output.weight), f.store.value(attn.output.bias));
    CHECK(max_abs_diff(y, ref) < 1e-12);
  }
  {
    const Tensor q = random_tensor({3, 8}, f.rng);
    Tensor k = random_tensor({2, 8}, f.rng);
    for (std::size_t c = 0; c < 8; ++c) k.at(1, c) = k.at(0, c);
    Graph g;
    std::vector<Tensor> w;
    mhca(g, f.store, attn, g.constant(q), g.constant(k), g.constant(k), {}, &w);
    for (const auto & h : w) {
      for (double v : h.data()) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
    }
  }
  for (std::size_t heads : {1u, 2u}) {
    Fixture f2;
    auto a = MultiHeadAttention::create(f2.scope(), AttentionSpec{8, heads}, 8, 6, 5);
    const Tensor q = random_tensor({3, 8}, f2.rng);
    const Tensor k = random_tensor({4, 6}, f2.rng);
    const Tensor v = random_tensor({4, 5}, f2.rng);
    Graph g;
    const auto y = mhca(g, f2.store, a, g.constant(q), g.constant(k), g.constant(v)).value();
    CHECK(max_abs_diff(y, attention_reference(f2.store, a, q, k, v)) < 1e-12);
    const Tensor s = random_tensor({3, 8}, f2.rng);
    auto b = MultiHeadAttention::create(f2.scope().sub("self"), AttentionSpec{8, heads}, 8, 8, 8);
    Graph g2;
    const auto ys = mhsa(g2, f2.store, b, g2.constant(s), g2.constant(s), g2.constant(s)).value();
    CHECK(max_abs_diff(ys, attention_reference(f2.store, b, s, s, s)) < 1e-12);
  }
}

TEST_CASE("attention rows sum to one for every head and query")
{
  Fixture f;
  auto attn = MultiHeadAttention::create(f.scope(), AttentionSpec{12, 3}, 12, 12, 12);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor q = random_tensor({5, 12}, f.rng, -3, 3);
    const Tensor k = random_tensor({7, 12}, f.rng, -3, 3);
    std::vector<char> mask(35, 1);
    for (std::size_t i = 0; i < 5; ++i) mask[i * 7 + (trial + i) % 7] = 0;
    Graph g;
    std::vector<Tensor> w;
    mhca(g, f.store, attn, g.constant(q), g.constant(k), g.constant(k), mask, &w);
    for (const auto & h : w) {
      for (std::size_t i = 0; i < 5; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 7; ++j) {
          s += h.at(i, j);
          if (!mask[i * 7 + j]) CHECK(h.at(i, j) == 0.0);
        }
        CHECK(std::abs(s - 1.0) < 1e-12);
      }
    }
  }
}

TEST_CASE("sinusoidal position encoding")
{
  Graph g;
  const auto zero = sinusoidal_pe(g.constant(Tensor({1, 2})), 8).value();
  for (std::size_t c = 0; c < 8; ++c) CHECK(zero[c] == (c % 2 == 0 ? 0.0 : 1.0));
  const auto one = sinusoidal_pe(g.constant(Tensor({1, 1}, 1.0)), 4).value();
  const double expect[4] = {std::sin(1.0), std::cos(1.0), std::sin(1e-2), std::cos(1e-2)};
  for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(one[c] - expect[c]) < 1e-12);
  std::mt19937_64 rng(3);
  const Tensor p = random_tensor({5, 2}, rng, -20, 20);
  CHECK(sinusoidal_pe(g.constant(p), 16).value() == sinusoidal_pe(g.constant(p), 16).value());
  CHECK_THROWS_AS(sinusoidal_pe(g.constant(Tensor({1, 1})), 7), ConfigError);
}

TEST_CASE("max pool")
{
  Graph g;
  std::mt19937_64 rng(5);
  const Tensor x = random_tensor({3, 1, 4}, rng);
  const std::vector<char> m1(3, 1);
  CHECK(max_pool(g.constant(x), m1).value() == x.reshaped({3, 4}));
  const Tensor y({1, 3, 1}, std::vector<double>{1, 5, 3});
  CHECK(max_pool(g.constant(y), std::vector<char>(3, 1)).value()[0] == 5.0);
  const std::vector<char> mask{1, 0, 1, 1, 1, 0};
  const double err = op_gradient_error(
    [&](Graph & gg, const std::vector<Var> & in) { return sum(square(max_pool(in[0], mask))); },
    {random_tensor({2, 3, 4}, rng)});
  CHECK(err < 1e-6);
}

TEST_CASE("k-means")
{
  std::mt19937_64 rng(11);
  const Tensor pts = Tensor::matrix(3, 2, {0, 0, 10, 0, 0, 10});
  const auto r = kmeans(pts, 3, 1);
  std::set<std::pair<double, double>> got, want{{0, 0}, {10, 0}, {0, 10}};
  for (std::size_t i = 0; i < 3; ++i) got.insert({r.centers.at(i, 0), r.centers.at(i, 1)});
  CHECK(got == want);

  const Tensor same({6, 2}, std::vector<double>{2, 3, 2, 3, 2, 3, 2, 3, 2, 3, 2, 3});
  const auto rs = kmeans(same, 3, 1);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(rs.centers.at(i, 0) == 2.0);
    CHECK(rs.centers.at(i, 1) == 3.0);
  }

  const Tensor cloud = random_tensor({20, 2}, rng, -10, 10);
  const auto rc = kmeans(cloud, 3, 7);
  const double best = kmeans_inertia(cloud, rc.centers);
  for (int t = 0; t < 100; ++t) CHECK(best <= kmeans_inertia(cloud, random_tensor({3, 2}, rng, -10, 10)) + 1e-12);
  for (std::size_t i = 1; i < rc.inertia.size(); ++i) CHECK(rc.inertia[i] <= rc.inertia[i - 1] + 1e-12);
  CHECK_THROWS(kmeans(pts, 4, 1));
}

TEST_CASE("backward basics")
{
  ParameterStore store;
  const auto id = store.add("theta", Tensor({3}, std::vector<double>{1, 2, 3}), ParamGroup::Encoder);
  {
    Graph g;
    g.backward(sum(g.parameter(store, id)), store);
    for (double v : store.entry(id).grad->data()) CHECK(v == 1.0);
  }
  store.zero_grad();
  const auto s = store.add("s", Tensor::scalar(3.0), ParamGroup::Encoder);
  {
    Graph g;
    g.backward(sum(square(g.parameter(store, s))), store);
    CHECK(store.entry(s).grad->item() == 6.0);
  }
  Graph g;
  const Var v = g.variable(Tensor({2}, 1.0));
  CHECK_THROWS_AS(g.backward(v), DimensionError);
  Graph g2;
  const Var l = sum(g2.variable(Tensor({2}, 1.0)));
  g2.backward(l);
  CHECK_THROWS_AS(g2.backward(l), StateError);
}

TEST_CASE("frozen parameters never receive gradients")
{
  ParameterStore store;
  const auto a = store.add("a", Tensor({2}, 1.5), ParamGroup::Encoder);
  const auto b = store.add("b", Tensor({2}, -0.5), ParamGroup::Decoder);
  store.set_group_trainable(ParamGroup::Decoder, false);
  Graph g;
  const Var va = g.parameter(store, a);
  const Var vb = g.parameter(store, b);
  g.backward(sum(mul(va, vb)), store);
  CHECK(store.entry(a).grad.has_value());
  CHECK_FALSE(store.entry(b).grad.has_value());
  CHECK(g.requires_grad(va.id()));
  CHECK_FALSE(g.requires_grad(vb.id()));
  CHECK(g.grad(vb) == nullptr);
}

TEST_CASE("every op matches central differences")
{
  std::mt19937_64 rng(99);
  auto R = [&](Shape s, double lo = -1.0, double hi = 1.0) { return random_tensor(s, rng, lo, hi); };
  // Keep arguments away from kinks so the finite difference is smooth.
  Tensor away = R({3, 4});
  for (auto & v : away.data()) v = v < 0 ? v - 0.2 : v + 0.2;
  const std::vector<std::size_t> cols{2, 0, 2};
  const std::vector<std::size_t> rows{1, 1, 0, 2};
  const std::vector<char> smask{1, 1, 0, 1, 0, 1, 1, 1, 1, 1, 1, 0};
  struct Case
  {
    const char * name;
    mtlb::testing::OpBuilder build;
    std::vector<Tensor> inputs;
  };
  const Tensor w = R({3, 4});
  std::vector<Case> cases{
    {"matmul", [](Graph &, auto & v) { return sum(square(matmul(v[0], v[1]))); }, {R({3, 4}), R({4, 2})}},
    {"matmul_nt", [](Graph &, auto & v) { return sum(square(matmul_nt(v[0], v[1]))); }, {R({3, 4}), R({5, 4})}},
    {"add", [w](Graph & g, auto & v) { return sum(mul(add(v[0], v[1]), g.constant(w))); }, {R({3, 4}), R({3, 4})}},
    {"sub", [w](Graph & g, auto & v) { return sum(mul(sub(v[0], v[1]), g.constant(w))); }, {R({3, 4}), R({3, 4})}},
    {"mul", [](Graph &, auto & v) { return sum(mul(v[0], v[1])); }, {R({3, 4}), R({3, 4})}},
    {"div", [](Graph &, auto & v) { return sum(div(v[0], v[1])); }, {R({3, 4}), R({3, 4}, 0.5, 2.0)}},
    {"add_rowvec", [](Graph &, auto & v) { return sum(square(add_rowvec(v[0], v[1]))); }, {R({3, 4}), R({4})}},
    {"scale", [w](Graph & g, auto & v) { return sum(mul(scale(v[0], -2.5), g.constant(w))); }, {R({3, 4})}},
    {"add_scalar", [](Graph &, auto & v) { return sum(square(add_scalar(v[0], 0.7))); }, {R({3, 4})}},
    {"relu", [w](Graph & g, auto & v) { return sum(mul(relu(v[0]), g.constant(w))); }, {away}},
    {"exp", [](Graph &, auto & v) { return sum(exp(v[0])); }, {R({3, 4})}},
    {"log", [](Graph &, auto & v) { return sum(log(v[0])); }, {R({3, 4}, 0.3, 3.0)}},
    {"tanh", [](Graph &, auto & v) { return sum(tanh(v[0])); }, {R({3, 4}, -2, 2)}},
    {"clamp", [w](Graph & g, auto & v) { return sum(mul(clamp(v[0], -0.1, 0.1), g.constant(w))); }, {away}},
    {"square", [](Graph &, auto & v) { return sum(square(v[0])); }, {R({3, 4})}},
    {"mean", [](Graph &, auto & v) { return mean(square(v[0])); }, {R({3, 4})}},
    {"reshape", [w](Graph & g, auto & v) { return sum(mul(reshape(v[0], {3, 4}), g.constant(w))); }, {R({2, 6})}},
    {"concat_cols",
     [](Graph &, auto & v) {
       const Var p[2] = {v[0], v[1]};
       return sum(square(concat_cols(p)));
     },
     {R({3, 2}), R({3, 3})}},
    {"concat_rows",
     [](Graph &, auto & v) {
       const Var p[2] = {v[0], v[1]};
       return sum(square(concat_rows(p)));
     },
     {R({2, 3}), R({1, 3})}},
    {"slice_cols", [](Graph &, auto & v) { return sum(square(slice_cols(v[0], 1, 2))); }, {R({3, 4})}},
    {"select_cols", [cols](Graph &, auto & v) { return sum(square(select_cols(v[0], cols))); }, {R({3, 4})}},
    {"gather_rows", [rows](Graph &, auto & v) { return sum(square(gather_rows(v[0], rows))); }, {R({3, 4})}},
    {"masked_softmax_rows",
     [w, smask](Graph & g, auto & v) { return sum(mul(masked_softmax_rows(v[0], smask), g.constant(w))); },
     {R({3, 4}, -2, 2)}},
    {"logsumexp_rows", [](Graph &, auto & v) { return sum(square(logsumexp_rows(v[0]))); }, {R({3, 4}, -2, 2)}},
    {"layer_norm_rows",
     [w](Graph & g, auto & v) { return sum(mul(layer_norm_rows(v[0], v[1], v[2]), g.constant(w))); },
     {R({3, 4}), R({4}), R({4})}},
    {"sinusoidal_pe", [](Graph &, auto & v) { return sum(sinusoidal_pe(v[0], 8)); }, {R({3, 2}, -3, 3)}},
  };
  for (const auto & c : cases) {
    CAPTURE(c.name);
    CHECK(op_gradient_error(c.build, c.inputs) < 1e-6);
  }
}

TEST_CASE("identical seeds build bit-identical modules")
{
  Fixture a, b;
  auto ma = Mlp::create(a.scope(), MlpSpec{{4, 8, 3}});
  auto mb = Mlp::create(b.scope(), MlpSpec{{4, 8, 3}});
  for (std::size_t i = 0; i < a.store.size(); ++i) CHECK(a.store.entries()[i].value == b.store.entries()[i].value);
  std::mt19937_64 rng(1);
  const Tensor x = random_tensor({2, 4}, rng);
  Graph g1, g2;
  CHECK(ma.forward(g1, a.store, g1.constant(x)).value() == mb.forward(g2, b.store, g2.constant(x)).value());
  CHECK_THROWS_AS(a.store.add(a.store.entries()[0].name, Tensor({1}), ParamGroup::Encoder), ConfigError);
}

TEST_CASE("key=value config")
{
  const auto kv = KeyValueConfig::parse("# comment\na.b = 3\n c=hello # trailing\nflag=true\n");
  CHECK(kv.get_int("a.b", 0) == 3);
  CHECK(kv.get_string("c", "") == "hello");
  CHECK(kv.get_bool("flag", false));
  CHECK(kv.get_double("missing", 1.5) == 1.5);
  CHECK_THROWS_AS(kv.get_int("c", 0), ConfigError);
  CHECK_THROWS_AS(kv.reject_unknown({"a.b", "c"}), ConfigError);
  CHECK_NOTHROW(kv.reject_unknown({"a.b", "c", "flag"}));
  CHECK_THROWS_AS(KeyValueConfig::parse("x=1\nx=2\n"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("novalue\n"), ConfigError);
  CHECK(KeyValueConfig::parse(kv.serialize()).values() == kv.values());
  CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
}

TEST_CASE("byte reader rejects truncated input")
{
  ByteWriter w;
  w.put<std::uint32_t>(7);
  w.put_string("abc");
  w.put_tensor(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  const std::string bytes = w.take();
  ByteReader r(bytes);
  CHECK(r.get<std::uint32_t>() == 7);
  CHECK(r.get_string() == "abc");
  CHECK(r.get_tensor() == Tensor::matrix(2, 2, {1, 2, 3, 4}));
  CHECK(r.done());
  for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
    ByteReader t(std::string_view(bytes).substr(0, cut));
    CHECK_THROWS_AS(
      {
        t.get<std::uint32_t>();
        t.get_string();
        t.get_tensor();
      },
      FormatError);
  }
}
