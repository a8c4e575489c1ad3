// Copyright 2026 The qbc3sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "oracles.hpp"
#include "qbc3/core.hpp"
#include "qbc3/errors.hpp"

using namespace qbc3;

namespace {

StateVector qubits(const Vector& amps, std::size_t count, Party owner = Party::B) {
  std::vector<Wire> wires;
  for (std::size_t i = 0; i < count; ++i) wires.push_back({qubit_label(static_cast<int>(i)), 2, owner, static_cast<int>(i)});
  return StateVector(wires, amps);
}

Vector kron_vec(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) out(i * b.size() + j) = a(i) * b(j);
  return out;
}

}  // namespace

TEST_SUITE("rng") {
  TEST_CASE("split seeds are deterministic and tag sensitive") {
    CHECK(split_seed(7, "scan", 0, 0) == split_seed(7, "scan", 0, 0));
    std::set<std::uint64_t> seen;
    for (std::uint64_t root : {0ULL, 1ULL})
      for (const char* tag : {"scan", "conceal", "session"})
        for (std::uint64_t g = 0; g < 4; ++g)
          for (std::uint64_t s = 0; s < 4; ++s) seen.insert(split_seed(root, tag, g, s));
    CHECK(seen.size() == 2 * 3 * 4 * 4);
  }

  TEST_CASE("uniform_below stays in range and covers every value") {
    Rng rng = make_rng(3, "t");
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) {
      const auto v = uniform_below(rng, 7);
      REQUIRE(v < 7);
      ++hits[v];
    }
    for (int h : hits) CHECK(h > 800);
    CHECK_THROWS_AS(uniform_below(rng, 0), InvalidArgument);
  }

  TEST_CASE("uniform01 lies in [0, 1)") {
    Rng rng = make_rng(4, "u");
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
      const double u = uniform01(rng);
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      sum += u;
    }
    CHECK(sum / 20000.0 == doctest::Approx(0.5).epsilon(0.02));
  }
}

TEST_SUITE("states") {
  TEST_CASE("BB84 amplitudes follow the Hilbert angle (id - 1) pi / 4") {
    for (int id = 1; id <= 4; ++id) CHECK((bb84_amplitudes(id) - oracle::bb84(id)).norm() < 1e-15);
    CHECK_THROWS_AS(bb84_amplitudes(0), InvalidArgument);
    CHECK_THROWS_AS(bb84_amplitudes(5), InvalidArgument);
  }

  TEST_CASE("rotation advances the Hilbert angle") {
    const double t = 0.3;
    const auto r = rotation_gate(t).matrix();
    for (int id = 1; id <= 4; ++id) {
      const double a = (id - 1) * std::numbers::pi / 4.0 + t;
      Vector expect(2);
      expect << std::cos(a), std::sin(a);
      CHECK((r * oracle::bb84(id) - expect).norm() < 1e-14);
    }
  }

  TEST_CASE("construction validates norm, labels and dimensions") {
    Vector bad(2);
    bad << 1.0, 1.0;
    CHECK_THROWS_AS(qubits(bad, 1), InvalidStateError);
    Vector ok(4);
    ok << 1.0, 0.0, 0.0, 0.0;
    std::vector<Wire> dup{{qubit_label(0), 2, Party::B, 0}, {qubit_label(0), 2, Party::B, 1}};
    CHECK_THROWS_AS(StateVector(dup, ok), ConflictError);
    CHECK_THROWS_AS(qubits(ok, 1), InvalidArgument);
    const auto s = qubits(ok, 2);
    CHECK_THROWS_AS(s.position(committed_label(0)), NotFoundError);
    CHECK(s.transferred(qubit_label(1), Party::A).wire(qubit_label(1)).owner == Party::A);
  }

  TEST_CASE("tensor orders amplitudes with the first wire slowest") {
    const StateVector parts[] = {bb84_state(1, qubit_label(0)), bb84_state(2, qubit_label(1))};
    const auto s = tensor(parts);
    CHECK((s.amplitudes() - kron_vec(oracle::bb84(1), oracle::bb84(2))).norm() < 1e-15);
    const StateVector clash[] = {bb84_state(1), bb84_state(2)};
    CHECK_THROWS_AS(tensor(clash), ConflictError);
  }

  TEST_CASE("uniform ancilla and density validation") {
    const auto a = uniform_ancilla(5);
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(std::abs(a.amplitudes()(i) - 1.0 / std::sqrt(5.0)) < 1e-15);
    Matrix neg(2, 2);
    neg << 1.5, 0.0, 0.0, -0.5;
    CHECK_THROWS_AS(DensityOperator{neg}, InvalidStateError);
    Matrix nonherm(2, 2);
    nonherm << 0.5, 0.2, 0.0, 0.5;
    CHECK_THROWS_AS(DensityOperator{nonherm}, InvalidStateError);
    Matrix notunit = Matrix::Identity(2, 2) * 2.0;
    CHECK_THROWS_AS(UnitaryOp{notunit}, InvalidArgument);
  }

  TEST_CASE("random unitaries are unitary") {
    Rng rng = make_rng(11, "haar");
    for (std::size_t d : {1u, 2u, 5u, 16u}) {
      const auto u = random_unitary(d, rng).matrix();
      CHECK((u.adjoint() * u - Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))).norm() <
            1e-12);
    }
  }
}

TEST_SUITE("evolution") {
  TEST_CASE("apply_on_wires matches index-loop evaluation for any wire order") {
    std::mt19937_64 gen(5);
    const std::vector<std::size_t> dims{2, 3, 2};
    const Vector psi = oracle::random_state(12, gen);
    std::vector<Wire> wires{{qubit_label(0), 2, Party::A, 0}, {ancilla_label(), 3, Party::A, -1},
                            {qubit_label(1), 2, Party::A, 1}};
    const StateVector s(wires, psi);
    const Matrix u = oracle::haar_unitary(4, gen);
    const WireLabel order[] = {qubit_label(1), qubit_label(0)};
    const auto out = apply_on_wires(s, UnitaryOp(u), order);
    CHECK((out.amplitudes() - oracle::apply(psi, dims, u, {2, 0})).norm() < 1e-12);

    const Matrix u3 = oracle::haar_unitary(6, gen);
    const WireLabel order3[] = {ancilla_label(), qubit_label(0)};
    CHECK((apply_on_wires(s, UnitaryOp(u3), order3).amplitudes() - oracle::apply(psi, dims, u3, {1, 0})).norm() <
          1e-12);
    CHECK_THROWS_AS(apply_on_wires(s, UnitaryOp(u3), order), InvalidArgument);
  }

  TEST_CASE("controlled shift moves position i to i + l") {
    const int ids[] = {1, 2, 3, 4};
    const std::size_t n = 4;
    for (std::size_t l = 0; l < n; ++l) {
      std::vector<StateVector> parts;
      Vector anc = Vector::Zero(static_cast<Eigen::Index>(n));
      anc(static_cast<Eigen::Index>(l)) = 1.0;
      parts.emplace_back(std::vector<Wire>{{ancilla_label(), n, Party::A, -1}}, anc);
      for (std::size_t i = 0; i < n; ++i) parts.push_back(bb84_state(ids[i], qubit_label(static_cast<int>(i)), Party::A));
      const auto s = tensor(parts);
      std::vector<WireLabel> q;
      for (std::size_t i = 0; i < n; ++i) q.push_back(qubit_label(static_cast<int>(i)));
      const auto shifted = controlled_shift(s, ancilla_label(), q);

      Vector expect = anc;
      for (std::size_t slot = 0; slot < n; ++slot) expect = kron_vec(expect, oracle::bb84(ids[(slot + n - l) % n]));
      CHECK((shifted.amplitudes() - expect).norm() < 1e-14);
      CHECK((controlled_unshift(shifted, ancilla_label(), q).amplitudes() - s.amplitudes()).norm() < 1e-14);
    }
  }

  TEST_CASE("controlled route applies the selected permutation and checks bijections") {
    std::mt19937_64 gen(8);
    std::vector<Wire> wires{{ancilla_label(), 2, Party::A, -1}};
    for (int i = 0; i < 3; ++i) wires.push_back({qubit_label(i), 2, Party::A, i});
    const StateVector s(wires, oracle::random_state(16, gen));
    const WireLabel q[] = {qubit_label(0), qubit_label(1), qubit_label(2)};
    std::map<std::size_t, Permutation> perms{{0, {0, 1, 2}}, {1, {2, 0, 1}}};
    const auto routed = controlled_route(s, ancilla_label(), q, perms);
    std::map<std::size_t, Permutation> back{{0, {0, 1, 2}}, {1, inverse({2, 0, 1})}};
    CHECK((controlled_route(routed, ancilla_label(), q, back).amplitudes() - s.amplitudes()).norm() < 1e-14);

    // Content at position 0 goes to position 2 on the ancilla=1 branch.
    const auto psi = s.amplitudes();
    for (std::size_t d = 0; d < 8; ++d) {
      const auto bits = oracle::digits(d, {2, 2, 2});
      const std::size_t moved = oracle::flat({bits[1], bits[2], bits[0]}, {2, 2, 2});
      CHECK(std::abs(routed.amplitudes()(static_cast<Eigen::Index>(8 + moved)) - psi(static_cast<Eigen::Index>(8 + d))) <
            1e-15);
    }
    CHECK_THROWS_AS(controlled_route(s, ancilla_label(), q, {{0, {0, 0, 1}}, {1, {0, 1, 2}}}), InvalidArgument);
    CHECK_THROWS_AS(controlled_route(s, ancilla_label(), q, {{0, {0, 1, 2}}}), InvalidArgument);
  }
}

TEST_SUITE("metrics") {
  TEST_CASE("partial trace agrees with the index-loop oracle") {
    std::mt19937_64 gen(21);
    const std::vector<std::size_t> dims{2, 3, 2, 2};
    const Vector psi = oracle::random_state(24, gen);
    std::vector<Wire> wires{{qubit_label(0), 2, Party::B, 0}, {ancilla_label(), 3, Party::A, -1},
                            {qubit_label(1), 2, Party::B, 1}, {qubit_label(2), 2, Party::A, 2}};
    const StateVector s(wires, psi);
    const WireLabel keep[] = {qubit_label(2), qubit_label(0)};
    CHECK((partial_trace(s, keep).matrix() - oracle::partial_trace(psi, dims, {3, 0})).norm() < 1e-13);
    const WireLabel keep1[] = {ancilla_label()};
    CHECK((partial_trace(s, keep1).matrix() - oracle::partial_trace(psi, dims, {1})).norm() < 1e-13);

    const auto rho = DensityOperator::pure(psi);
    const std::size_t k[] = {3, 0};
    CHECK((partial_trace(rho, dims, k).matrix() - oracle::partial_trace(psi, dims, {3, 0})).norm() < 1e-13);
  }

  TEST_CASE("qubit fidelity and trace distance match closed forms") {
    std::mt19937_64 gen(31);
    for (int i = 0; i < 200; ++i) {
      const Matrix a = oracle::random_density(2, 1 + i % 2, gen);
      const Matrix b = oracle::random_density(2, 1 + (i / 2) % 2, gen);
      const DensityOperator ra(a), rb(b);
      CHECK(fidelity(ra, rb) == doctest::Approx(oracle::qubit_fidelity(a, b)).epsilon(1e-7));
      CHECK(trace_distance(ra, rb) == doctest::Approx(oracle::qubit_trace_distance(a, b)).epsilon(1e-10));
    }
  }

  TEST_CASE("pure and commuting cases") {
    std::mt19937_64 gen(4);
    const Vector u = oracle::random_state(3, gen), v = oracle::random_state(3, gen);
    const double ov = std::abs(u.dot(v));
    CHECK(fidelity(DensityOperator::pure(u), DensityOperator::pure(v)) == doctest::Approx(ov).epsilon(1e-6));
    CHECK(trace_distance(DensityOperator::pure(u), DensityOperator::pure(v)) ==
          doctest::Approx(std::sqrt(1 - ov * ov)).epsilon(1e-10));
    Matrix p = Matrix::Zero(3, 3), q = Matrix::Zero(3, 3);
    p.diagonal() << 0.5, 0.3, 0.2;
    q.diagonal() << 0.1, 0.1, 0.8;
    CHECK(trace_distance(DensityOperator(p), DensityOperator(q)) == doctest::Approx(0.6));
    CHECK(fidelity(DensityOperator(p), DensityOperator(q)) ==
          doctest::Approx(std::sqrt(0.05) + std::sqrt(0.03) + std::sqrt(0.16)));
  }

  TEST_CASE("Fuchs-van de Graaf holds on random mixed states") {
    std::mt19937_64 gen(77);
    for (int i = 0; i < 300; ++i) {
      const std::size_t d = 2 + static_cast<std::size_t>(i % 5);
      const DensityOperator a(oracle::random_density(d, 1 + static_cast<std::size_t>(i % 3), gen));
      const DensityOperator b(oracle::random_density(d, 1 + static_cast<std::size_t>((i / 3) % 3), gen));
      const double f = fidelity(a, b), dist = trace_distance(a, b);
      CHECK(1.0 - f <= dist + 1e-9);
      CHECK(dist <= std::sqrt(std::max(0.0, 1.0 - f * f)) + 1e-9);
      CHECK(fidelity(a, b) == doctest::Approx(fidelity(b, a)).epsilon(1e-7));
    }
  }

  TEST_CASE("tensoring with an identical state preserves trace distance") {
    std::mt19937_64 gen(9);
    const DensityOperator a(oracle::random_density(2, 2, gen)), b(oracle::random_density(2, 2, gen));
    const DensityOperator c(oracle::random_density(3, 2, gen));
    CHECK(trace_distance(kron(a, c), kron(b, c)) == doctest::Approx(trace_distance(a, b)).epsilon(1e-12));
    CHECK(trace_distance(kron(c, a), kron(c, b)) == doctest::Approx(trace_distance(a, b)).epsilon(1e-12));
  }
}

TEST_SUITE("uhlmann") {
  // psi = (U_A (x) V_B)|phi>: A holds wires 0..a-1, B the rest.
  StateVector bipartite(const Vector& amps, std::size_t a_qubits, std::size_t b_qubits, bool a_first) {
    std::vector<Wire> wires;
    int slot = 0;
    auto add = [&](std::size_t count, Party p) {
      for (std::size_t i = 0; i < count; ++i, ++slot) wires.push_back({qubit_label(slot), 2, p, slot});
    };
    if (a_first) {
      add(a_qubits, Party::A);
      add(b_qubits, Party::B);
    } else {
      add(b_qubits, Party::B);
      add(a_qubits, Party::A);
    }
    return StateVector(wires, amps);
  }

  TEST_CASE("trace norm equals fidelity of B's views and the unitary attains it") {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t a = 1 + static_cast<std::size_t>(trial % 3), b = 1 + static_cast<std::size_t>((trial / 3) % 3);
      const bool a_first = trial % 2 == 0;
      const std::size_t dim = std::size_t{1} << (a + b);
      const auto s0 = bipartite(oracle::random_state(dim, gen), a, b, a_first);
      const auto s1 = bipartite(oracle::random_state(dim, gen), a, b, a_first);
      const auto a_wires = s0.owned_by(Party::A);
      const auto b_wires = s0.owned_by(Party::B);
      const auto cheat = cheat_operator(s0, s1, a_wires);
      const double f = fidelity(partial_trace(s0, b_wires), partial_trace(s1, b_wires));
      CHECK(std::abs(cheat.trace_norm - f) < 1e-7);  // fidelity goes through a matrix sqrt
      CHECK(std::abs(cheat.trace_norm - cheat_trace_norm(s0, s1, a_wires)) < 1e-10);
      const auto moved = apply_on_wires(s0, cheat.u_opt, a_wires);
      CHECK(std::abs(std::abs(inner_product(s1, moved)) - cheat.trace_norm) < 1e-9);
      const auto& u = cheat.u_opt.matrix();
      CHECK((u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).norm() < 1e-10);

      for (int r = 0; r < 25; ++r) {
        const UnitaryOp w(oracle::haar_unitary(std::size_t{1} << a, gen));
        CHECK(std::abs(inner_product(s1, apply_on_wires(s0, w, a_wires))) <= cheat.trace_norm + 1e-9);
      }
    }
  }

  TEST_CASE("Schmidt rank oracle: product states give trace norm equal to the overlap of B parts") {
    std::mt19937_64 gen(3);
    const Vector a0 = oracle::random_state(4, gen), b0 = oracle::random_state(2, gen);
    const Vector a1 = oracle::random_state(4, gen), b1 = oracle::random_state(2, gen);
    const auto s0 = bipartite(kron_vec(a0, b0), 2, 1, true);
    const auto s1 = bipartite(kron_vec(a1, b1), 2, 1, true);
    CHECK(oracle::schmidt_rank(s0.amplitudes(), 4) == 1);
    const auto a_wires = s0.owned_by(Party::A);
    CHECK(cheat_operator(s0, s1, a_wires).trace_norm == doctest::Approx(std::abs(b0.dot(b1))).epsilon(1e-10));
  }
}

TEST_SUITE("measurement") {
  TEST_CASE("Luders measurement on a maximally entangled pair") {
    Vector bell = Vector::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    const auto s = qubits(bell, 2);
    Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
    p0(0, 0) = 1.0;
    p1(1, 1) = 1.0;
    const Projector ps[] = {p0, p1};
    const auto branches = luders_measure(s, qubit_label(0), ps);
    REQUIRE(branches.size() == 2);
    for (const auto& br : branches) {
      CHECK(br.probability == doctest::Approx(0.5));
      const auto expect = br.outcome_index == 0 ? 0 : 3;
      CHECK(std::abs(std::abs(br.post_state.amplitudes()(expect)) - 1.0) < 1e-14);
    }
  }

  TEST_CASE("measurement operators are validated") {
    const auto s = bb84_state(2);
    Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
    p0(0, 0) = 1.0;
    p1(0, 0) = 1.0;
    const Projector overlap[] = {p0, p1};
    CHECK_THROWS_AS(luders_measure(s, qubit_label(0), overlap), InvalidArgument);
    const Projector incomplete[] = {p0};
    CHECK_THROWS_AS(luders_measure(s, qubit_label(0), incomplete), InvalidArgument);
    Matrix half = Matrix::Identity(2, 2) * 0.5;
    const Projector notproj[] = {half, half};
    CHECK_THROWS_AS(luders_measure(s, qubit_label(0), notproj), InvalidArgument);
  }

  TEST_CASE("branch probabilities sum to one and post-states are normalized") {
    std::mt19937_64 gen(12);
    std::vector<Wire> wires{{ancilla_label(), 5, Party::A, -1}, {qubit_label(0), 2, Party::B, 0}};
    const StateVector s(wires, oracle::random_state(10, gen));
    const std::size_t in[] = {0, 3}, out[] = {1, 2, 4};
    const Projector ps[] = {ancilla_subset_projector(5, in), ancilla_subset_projector(5, out)};
    double total = 0.0;
    for (const auto& br : luders_measure(s, ancilla_label(), ps)) {
      total += br.probability;
      CHECK(br.post_state.amplitudes().norm() == doctest::Approx(1.0));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("project returns the squared norm of the projected vector") {
    std::mt19937_64 gen(13);
    std::vector<Wire> wires{{qubit_label(0), 2, Party::B, 0}, {qubit_label(1), 2, Party::B, 1}};
    const Vector psi = oracle::random_state(4, gen);
    const StateVector s(wires, psi);
    const Vector target = oracle::bb84(4);
    const Projector p = target * target.adjoint();
    const WireLabel w[] = {qubit_label(1)};
    const auto r = project(s, p, w);
    const Vector expect = oracle::apply(psi, {2, 2}, p, {1});
    CHECK(r.probability == doctest::Approx(expect.squaredNorm()).epsilon(1e-12));
    REQUIRE(r.post_state);
    CHECK((r.post_state->amplitudes() - expect / expect.norm()).norm() < 1e-12);

    const std::size_t none[] = {0};
    CHECK(ancilla_subset_projector(3, none).trace().real() == doctest::Approx(1.0));
    const std::size_t bad[] = {3};
    CHECK_THROWS_AS(ancilla_subset_projector(3, bad), InvalidArgument);
  }
}
