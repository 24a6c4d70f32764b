#include <doctest.h>

#include <Eigen/Dense>

#include <thread>

#include "cpfjd/oracle.hpp"
#include "cpfjd/solver.hpp"
#include "instances.hpp"
#include "support.hpp"

using namespace cpfjd;
namespace t = cpfjd::testing;

namespace {

SparseMatrix scaled(const SparseMatrix& m, double factor) {
  std::vector<Triplet> trips;
  const auto offsets = m.row_offsets();
  const auto cols = m.column_indices();
  const auto vals = m.values();
  for (Index i = 0; i < m.rows(); ++i) {
    for (int k = offsets[static_cast<std::size_t>(i)];
         k < offsets[static_cast<std::size_t>(i) + 1]; ++k) {
      trips.push_back({i, cols[static_cast<std::size_t>(k)],
                       factor * vals[static_cast<std::size_t>(k)]});
    }
  }
  return SparseMatrix::from_triplets(m.rows(), m.cols(), trips);
}

double frobenius_deflation_residual(const MatrixPair& pair,
                                    const ConvergedSet& conv) {
  double sum = 0.0;
  for (Index j = 0; j < conv.size(); ++j) {
    const Vector r = conv.s[j] * spmv_transpose(pair.a, conv.u_c.col(j)) -
                     conv.c[j] * spmv_transpose(pair.b, conv.v_c.col(j));
    sum += r.squaredNorm();
  }
  return std::sqrt(sum);
}

}  // namespace

TEST_CASE("diagonal pair converges to the target value") {
  std::vector<Triplet> trips;
  for (Index i = 0; i < 10; ++i) {
    trips.push_back({i, i, static_cast<double>(i + 1)});
  }
  const MatrixPair pair(SparseMatrix::from_triplets(10, 10, trips),
                        SparseMatrix::identity(10));
  SolverConfig cfg;
  cfg.tau = 7.0;
  cfg.ell = 1;
  cfg.k_min = 2;
  cfg.k_max = 8;
  const RunResult result = run(pair, cfg);
  REQUIRE(result.stats.all_converged);
  REQUIRE(result.converged.size() == 1);
  const double sigma = result.converged.c[0] / result.converged.s[0];
  CHECK(sigma == doctest::Approx(7.0).epsilon(1e-11));
  CHECK(result.stats.outer_total <= 10);
  CHECK(frobenius_deflation_residual(pair, result.converged) <=
        std::sqrt(1.0 * (pair.norm1_a * pair.norm1_a +
                         pair.norm1_b * pair.norm1_b)) *
            cfg.tol);
}

TEST_CASE("five components match the oracle's target order") {
  auto rng = t::make_rng(91);
  const MatrixPair pair(t::random_sparse(rng, 80, 60), gen_b0(60));
  const FullGsvd oracle = dense_full_gsvd(pair);
  const double tau = oracle.sigma(30);  // interior; not equal to any
  const double tau_used = tau * 1.003;

  SolverConfig cfg;
  cfg.tau = tau_used;
  cfg.ell = 5;
  const RunResult result = run(pair, cfg);
  REQUIRE(result.stats.all_converged);
  REQUIRE(result.converged.size() == 5);

  std::vector<double> got;
  for (Index j = 0; j < 5; ++j) {
    got.push_back(result.converged.c[j] / result.converged.s[j]);
  }
  std::sort(got.begin(), got.end(), [&](double a, double b) {
    return std::abs(a - tau_used) < std::abs(b - tau_used);
  });
  const std::vector<Index> ref = closest_to_target(oracle, tau_used, 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(got[i] ==
          doctest::Approx(oracle.sigma(ref[i])).epsilon(1e-8));
  }

  // All components distinct, residuals below threshold, bound holds.
  for (Index a = 0; a < 5; ++a) {
    for (Index b = a + 1; b < 5; ++b) {
      CHECK(std::abs(got[static_cast<std::size_t>(a)] -
                     got[static_cast<std::size_t>(b)]) > 0.0);
    }
  }
  for (Index j = 0; j < 5; ++j) {
    const Vector r =
        result.converged.s[j] * spmv_transpose(pair.a, result.converged.u_c.col(j)) -
        result.converged.c[j] * spmv_transpose(pair.b, result.converged.v_c.col(j));
    CHECK(r.norm() <= (result.converged.s[j] * pair.norm1_a +
                       result.converged.c[j] * pair.norm1_b) *
                          cfg.tol);
  }
  CHECK(frobenius_deflation_residual(pair, result.converged) <=
        std::sqrt(5.0 * (pair.norm1_a * pair.norm1_a +
                         pair.norm1_b * pair.norm1_b)) *
            cfg.tol);
}

TEST_CASE("subspace dimension grows by one except at restart and purge") {
  auto rng = t::make_rng(92);
  const MatrixPair pair(t::random_sparse(rng, 70, 50), gen_b0(50));
  SolverConfig cfg;
  cfg.tau = 2.0;
  cfg.ell = 3;
  cfg.k_min = 3;
  cfg.k_max = 12;
  const RunResult result = run(pair, cfg);
  REQUIRE(result.stats.all_converged);

  const auto& trace = result.stats.trace;
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
    const Index k = trace[i].k;
    const Index k_next = trace[i + 1].k;
    if (trace[i].converged) {
      CHECK((k_next == k - 1 || k_next == 1));
    } else if (k == cfg.k_max) {
      CHECK(k_next == cfg.k_min + 1);
    } else {
      CHECK(k_next == k + 1);
    }
  }
}

TEST_CASE("theta trajectory matches the dense closed-form expansion") {
  auto rng = t::make_rng(93);
  const MatrixPair pair(t::random_sparse(rng, 70, 48), gen_b0(48));
  SolverConfig cfg;
  cfg.tau = 1.7;
  cfg.ell = 1;
  cfg.inner_tol_override = 1e-14;
  const RunResult iterative = run(pair, cfg);

  // The same loop with the correction equation solved by a dense
  // factorization.
  const Matrix a = to_dense(pair.a);
  const Matrix b = to_dense(pair.b);
  const Matrix ata = a.transpose() * a;
  const Matrix btb = b.transpose() * b;
  auto rng2 = t::make_rng(0);
  const ConvergedSet conv = ConvergedSet::empty(70, 48, 48);
  SolverConfig exact_cfg = cfg;
  SearchState state = initialize(pair, exact_cfg, conv, rng2);
  std::vector<double> exact_thetas;
  for (int it = 0; it < 10; ++it) {
    const RitzApproximation ritz = extract_ritz(state, pair, exact_cfg);
    exact_thetas.push_back(ritz.theta);
    if (check_outer_convergence(ritz, pair, exact_cfg.tol)) break;
    const ShiftChoice choice = select_shift(ritz, pair, exact_cfg);
    const double shift = choice == ShiftChoice::RitzValue
                             ? ritz.theta * ritz.theta
                             : exact_cfg.tau * exact_cfg.tau;
    Eigen::PartialPivLU<Matrix> lu(ata - shift * btb);
    const Vector lr = lu.solve(ritz.r);
    const Vector ly = lu.solve(ritz.y);
    const Vector tvec = -lr + (ritz.y.dot(lr) / ritz.y.dot(ly)) * ly;
    expand(state, pair, tvec, conv, rng2);
  }

  const auto& trace = iterative.stats.trace;
  for (std::size_t i = 0; i < exact_thetas.size() && i < trace.size(); ++i) {
    CHECK(trace[i].theta ==
          doctest::Approx(exact_thetas[i]).epsilon(1e-8));
  }
}

TEST_CASE("scaling the pair leaves the values and scales the vectors") {
  auto rng = t::make_rng(94);
  const SparseMatrix a = t::random_sparse(rng, 60, 40);
  const SparseMatrix b = gen_b0(40);
  const MatrixPair pair(a, b);
  const MatrixPair pair10(scaled(a, 10.0), scaled(b, 10.0));

  SolverConfig cfg;
  cfg.tau = t::well_separated_tau(dense_full_gsvd(pair), 3);
  cfg.ell = 3;
  const RunResult base = run(pair, cfg);
  const RunResult big = run(pair10, cfg);
  REQUIRE(base.stats.all_converged);
  REQUIRE(big.stats.all_converged);
  REQUIRE(base.converged.size() == big.converged.size());

  for (Index j = 0; j < base.converged.size(); ++j) {
    CHECK(std::abs(base.converged.c[j] - big.converged.c[j]) <= 1e-12);
    CHECK(std::abs(base.converged.s[j] - big.converged.s[j]) <= 1e-12);
    const Vector expected = 0.1 * base.converged.x_c.col(j);
    CHECK((big.converged.x_c.col(j) - expected).norm() <=
          1e-10 * expected.norm());
  }
}

TEST_CASE("max_outer exhaustion returns a flagged partial result") {
  auto rng = t::make_rng(95);
  const MatrixPair pair(t::random_sparse(rng, 60, 40), gen_b0(40));
  SolverConfig cfg;
  cfg.tau = 1.9;
  cfg.ell = 2;
  cfg.max_outer = 2;  // far too few
  const RunResult result = run(pair, cfg);
  CHECK_FALSE(result.stats.all_converged);
  CHECK(result.converged.size() < 2);
  CHECK_FALSE(result.stats.warnings.empty());
}

TEST_CASE("rerunning the acceptance test on converged output is stable") {
  auto rng = t::make_rng(96);
  const MatrixPair pair(t::random_sparse(rng, 50, 36), gen_b0(36));
  SolverConfig cfg;
  cfg.tau = 2.1;
  cfg.ell = 2;
  const RunResult result = run(pair, cfg);
  REQUIRE(result.stats.all_converged);
  for (Index j = 0; j < result.converged.size(); ++j) {
    RitzApproximation ritz;
    ritz.alpha = result.converged.c[j];
    ritz.beta = result.converged.s[j];
    ritz.r_norm =
        (result.converged.s[j] * spmv_transpose(pair.a, result.converged.u_c.col(j)) -
         result.converged.c[j] * spmv_transpose(pair.b, result.converged.v_c.col(j)))
            .norm();
    CHECK(check_outer_convergence(ritz, pair, cfg.tol));
  }
}

TEST_CASE("rank-deficient B with the mod4 start vector") {
  auto rng = t::make_rng(97);
  const MatrixPair pair(t::random_sparse(rng, 60, 40), gen_b1(40));
  const FullGsvd oracle = dense_full_gsvd(pair);
  SolverConfig cfg;
  cfg.tau = oracle.sigma(20) * 1.001;
  cfg.ell = 2;
  cfg.x0_kind = StartVector::Mod4;
  const RunResult result = run(pair, cfg);
  REQUIRE(result.stats.all_converged);
  std::vector<double> got;
  for (Index j = 0; j < 2; ++j) {
    got.push_back(result.converged.c[j] / result.converged.s[j]);
  }
  std::sort(got.begin(), got.end(), [&](double x, double y) {
    return std::abs(x - cfg.tau) < std::abs(y - cfg.tau);
  });
  const std::vector<Index> ref = closest_to_target(oracle, cfg.tau, 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(got[i] == doctest::Approx(oracle.sigma(ref[i])).epsilon(1e-8));
  }
}

TEST_CASE("ones start vector on a rank-deficient B still recovers") {
  // ones spans N(B1): the first projected pair has H = [0] and the
  // driver must proceed through the infinite Ritz value.
  auto rng = t::make_rng(98);
  const MatrixPair pair(t::random_sparse(rng, 45, 30), gen_b1(30));
  const FullGsvd oracle = dense_full_gsvd(pair);
  SolverConfig cfg;
  cfg.tau = oracle.sigma(15) * 1.001;
  cfg.ell = 1;
  const RunResult result = run(pair, cfg);
  REQUIRE(result.stats.all_converged);
  const double sigma = result.converged.c[0] / result.converged.s[0];
  const std::vector<Index> ref = closest_to_target(oracle, cfg.tau, 1);
  CHECK(sigma == doctest::Approx(oracle.sigma(ref[0])).epsilon(1e-8));
}

TEST_CASE("convergence at k = 1 restarts from a fresh vector") {
  // x0 = e1 is an exact right vector of the diagonal pair, so the first
  // component converges with a one-dimensional subspace and the driver
  // must rebuild the state orthogonally to Y_c for the second one.
  std::vector<Triplet> trips;
  for (Index i = 0; i < 6; ++i) {
    trips.push_back({i, i, static_cast<double>(i + 1)});
  }
  const MatrixPair pair(SparseMatrix::from_triplets(6, 6, trips),
                        SparseMatrix::identity(6));
  SolverConfig cfg;
  cfg.tau = 1.2;
  cfg.ell = 2;
  cfg.k_min = 2;
  cfg.k_max = 5;
  cfg.x0_kind = StartVector::Custom;
  cfg.x0_custom = Vector::Unit(6, 0);
  const RunResult result = run(pair, cfg);
  REQUIRE(result.stats.all_converged);
  REQUIRE(result.stats.trace.size() >= 2);
  CHECK(result.stats.trace[0].converged);
  CHECK(result.stats.trace[0].k == 1);
  std::vector<double> got = {result.converged.c[0] / result.converged.s[0],
                             result.converged.c[1] / result.converged.s[1]};
  std::sort(got.begin(), got.end());
  CHECK(got[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(got[1] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("independent runs share an immutable pair across threads") {
  auto rng = t::make_rng(99);
  const MatrixPair pair(t::random_sparse(rng, 60, 42), gen_b0(42));
  SolverConfig cfg_a;
  cfg_a.tau = 1.8;
  cfg_a.ell = 2;
  SolverConfig cfg_b = cfg_a;
  cfg_b.tau = 2.6;

  RunResult ra_threaded, rb_threaded;
  {
    std::thread ta([&] { ra_threaded = run(pair, cfg_a); });
    std::thread tb([&] { rb_threaded = run(pair, cfg_b); });
    ta.join();
    tb.join();
  }
  const RunResult ra = run(pair, cfg_a);
  const RunResult rb = run(pair, cfg_b);
  REQUIRE(ra.stats.all_converged);
  REQUIRE(rb.stats.all_converged);
  CHECK((ra_threaded.converged.c - ra.converged.c).norm() == 0.0);
  CHECK((rb_threaded.converged.c - rb.converged.c).norm() == 0.0);
  CHECK(t::max_abs(ra_threaded.converged.x_c - ra.converged.x_c) == 0.0);
  CHECK(t::max_abs(rb_threaded.converged.x_c - rb.converged.x_c) == 0.0);
}
