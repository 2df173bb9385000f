#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "specop/models.hpp"
#include "specop/solvers.hpp"

using namespace specop;

namespace {

std::shared_ptr<const SpectrumModel> flat_spectrum(int blocks, int dim) {
    std::vector<BlockInfo> infos;
    for (int k = 0; k < blocks; ++k) infos.push_back({k, static_cast<double>(k), dim, ""});
    return std::make_shared<SpectrumModel>(1, 1.0, std::move(infos));
}

Mat random_matrix(int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = Cplx(gauss(rng), gauss(rng));
    return m;
}

Mat random_unitary(int d, std::uint64_t seed) {
    const Mat g = random_matrix(d, seed);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ() * Mat::Identity(d, d);
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
    return q;
}

Vec random_vector(int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = Cplx(gauss(rng), gauss(rng));
    return v;
}

// normal matrix with prescribed eigenvalues, conjugated by a random unitary
Mat normal_with_eigs(const Vec& mu, std::uint64_t seed) {
    const Mat q = random_unitary(static_cast<int>(mu.size()), seed);
    return q.adjoint() * mu.asDiagonal() * q;
}

CoefficientField field_from(std::shared_ptr<const SpectrumModel> spec, std::vector<Vec> blocks) {
    return CoefficientField(std::move(spec), std::move(blocks));
}

}  // namespace

TEST_CASE("solve_single") {
    auto spec = flat_spectrum(1, 2);
    Mat m = Vec((Vec(2) << Cplx(2, 0), Cplx(0, 0)).finished()).asDiagonal();
    InvariantSymbol p(spec, {m});
    SUBCASE("compatible data inverts on the range") {
        auto out = solve_single(p, field_from(spec, {(Vec(2) << Cplx(4, 0), Cplx(0, 0)).finished()}));
        CHECK(out.solution.block(0)[0] == Cplx(2, 0));
        CHECK(out.solution.block(0)[1] == Cplx(0, 0));
        CHECK(out.compat_failures.empty());
        CHECK(out.residuals[0] <= 1e-14);
    }
    SUBCASE("unreachable component is recorded with its deficit") {
        auto out = solve_single(p, field_from(spec, {(Vec(2) << Cplx(4, 0), Cplx(1, 0)).finished()}));
        CHECK(out.solution.block(0)[0] == Cplx(2, 0));
        CHECK(out.solution.block(0)[1] == Cplx(0, 0));
        REQUIRE(out.compat_failures.size() == 1);
        CHECK(out.compat_failures[0].k == 0);
        CHECK(out.compat_failures[0].deficit == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("random full-rank blocks agree with the dense inverse") {
        auto spec4 = flat_spectrum(6, 4);
        std::vector<Mat> blocks;
        std::vector<Vec> fb;
        for (int k = 0; k < 6; ++k) {
            blocks.push_back(random_matrix(4, 600 + k) + 4.0 * Mat::Identity(4, 4));
            fb.push_back(random_vector(4, 700 + k));
        }
        InvariantSymbol q(spec4, blocks);
        auto f = field_from(spec4, fb);
        auto out = solve_single(q, f);
        for (int k = 0; k < 6; ++k) {
            const Vec direct = blocks[static_cast<std::size_t>(k)].fullPivLu().solve(f.block(k));
            CHECK((out.solution.block(k) - direct).norm() <= 1e-10 * direct.norm());
        }
    }
}

TEST_CASE("solve_system_lsq") {
    auto spec = flat_spectrum(5, 3);
    std::vector<Mat> b1, b2;
    for (int k = 0; k < 5; ++k) {
        b1.push_back(random_matrix(3, 10 + k));
        b2.push_back(random_matrix(3, 20 + k));
    }
    SystemSymbol sys({InvariantSymbol(spec, b1), InvariantSymbol(spec, b2)});
    SUBCASE("planted compatible data is recovered") {
        std::vector<Vec> ub;
        for (int k = 0; k < 5; ++k) ub.push_back(random_vector(3, 30 + k));
        CoefficientField u(spec, ub);
        std::vector<CoefficientField> f{sys.op(0).apply(u), sys.op(1).apply(u)};
        auto out = solve_system_lsq(sys, f);
        for (int k = 0; k < 5; ++k)
            CHECK((out.solution.block(k) - u.block(k)).norm() <= 1e-10 * u.block(k).norm());
        CHECK(out.compat_failures.empty());
    }
    SUBCASE("inconsistent data leaves the distance to the stacked range") {
        std::vector<Vec> f1, f2;
        for (int k = 0; k < 5; ++k) {
            f1.push_back(random_vector(3, 40 + k));
            f2.push_back(random_vector(3, 50 + k));
        }
        std::vector<CoefficientField> f{field_from(spec, f1), field_from(spec, f2)};
        auto out = solve_system_lsq(sys, f);
        for (int k = 0; k < 5; ++k) {
            Mat stacked(6, 3);
            stacked.topRows(3) = b1[static_cast<std::size_t>(k)];
            stacked.bottomRows(3) = b2[static_cast<std::size_t>(k)];
            Vec rhs(6);
            rhs.head(3) = f[0].block(k);
            rhs.tail(3) = f[1].block(k);
            // oracle: distance of the data to the range via an orthogonal projector
            Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeThinU);
            const Vec proj = svd.matrixU() * (svd.matrixU().adjoint() * rhs);
            CHECK(out.residuals[static_cast<std::size_t>(k)] ==
                  doctest::Approx((rhs - proj).norm()).epsilon(1e-10));
        }
    }
    SUBCASE("n = 1 reduces to solve_single") {
        SystemSymbol one({sys.op(0)});
        std::vector<Vec> fb;
        for (int k = 0; k < 5; ++k) fb.push_back(random_vector(3, 60 + k));
        CoefficientField f(spec, fb);
        auto a = solve_system_lsq(one, {f});
        auto b = solve_single(sys.op(0), f);
        for (int k = 0; k < 5; ++k)
            CHECK((a.solution.block(k) - b.solution.block(k)).norm() <= 1e-14);
    }
}

TEST_CASE("solve_system_normal") {
    SUBCASE("commuting diagonal pair with the operator switch") {
        auto spec = flat_spectrum(1, 2);
        Mat s1 = Vec((Vec(2) << Cplx(0, 0), Cplx(3, 0)).finished()).asDiagonal();
        Mat s2 = Vec((Vec(2) << Cplx(5, 0), Cplx(0, 0)).finished()).asDiagonal();
        SystemSymbol sys({InvariantSymbol(spec, {s1}), InvariantSymbol(spec, {s2})});
        std::vector<CoefficientField> f{
            field_from(spec, {(Vec(2) << Cplx(0, 0), Cplx(6, 0)).finished()}),
            field_from(spec, {(Vec(2) << Cplx(10, 0), Cplx(0, 0)).finished()})};
        auto out = solve_system_normal(sys, f);
        CHECK((out.solution.block(0) - (Vec(2) << Cplx(2, 0), Cplx(2, 0)).finished()).norm() <=
              1e-12);
        CHECK(out.compat_failures.empty());
    }
    SUBCASE("planted non-commuting pair with trivially intersecting kernels") {
        auto spec = flat_spectrum(1, 2);
        Mat s1 = Vec((Vec(2) << Cplx(0, 0), Cplx(1, 0)).finished()).asDiagonal();
        Mat s2(2, 2);
        s2 << Cplx(1, 0), Cplx(-1, 0), Cplx(-1, 0), Cplx(1, 0);
        SystemSymbol sys({InvariantSymbol(spec, {s1}), InvariantSymbol(spec, {s2})});
        const Vec u_true = (Vec(2) << Cplx(3, 0), Cplx(4, 0)).finished();
        std::vector<CoefficientField> f{
            field_from(spec, {s1 * u_true}),
            field_from(spec, {s2 * u_true})};
        CHECK((f[0].block(0) - (Vec(2) << Cplx(0, 0), Cplx(4, 0)).finished()).norm() == 0.0);
        CHECK((f[1].block(0) - (Vec(2) << Cplx(-1, 0), Cplx(1, 0)).finished()).norm() == 0.0);
        auto out = solve_system_normal(sys, f);
        CHECK((out.solution.block(0) - u_true).norm() <= 1e-10);
        // oracle: stacked least squares on the same block
        auto oracle = solve_system_lsq(sys, f);
        CHECK((out.solution.block(0) - oracle.solution.block(0)).norm() <= 1e-10);
        CHECK(out.residuals[0] <= 1e-10);
    }
    SUBCASE("invertible working operator reduces to the direct inverse") {
        auto spec = flat_spectrum(1, 3);
        const Mat s1 = normal_with_eigs((Vec(3) << Cplx(2, 1), Cplx(-1, 0), Cplx(0, 3)).finished(), 42);
        const Mat s2 = normal_with_eigs((Vec(3) << Cplx(0, 0), Cplx(1, 0), Cplx(2, 0)).finished(), 43);
        SystemSymbol sys({InvariantSymbol(spec, {s1}), InvariantSymbol(spec, {s2})});
        const Vec u_true = random_vector(3, 44);
        std::vector<CoefficientField> f{field_from(spec, {s1 * u_true}),
                                        field_from(spec, {s2 * u_true})};
        auto out = solve_system_normal(sys, f);
        const Vec direct = s1.fullPivLu().solve(f[0].block(0));
        CHECK((out.solution.block(0) - direct).norm() <= 1e-10);
    }
    SUBCASE("blocks with joint kernel are solved in the complement") {
        auto spec = flat_spectrum(1, 2);
        Mat s1 = Vec((Vec(2) << Cplx(0, 0), Cplx(2, 0)).finished()).asDiagonal();
        Mat s2 = Vec((Vec(2) << Cplx(0, 0), Cplx(3, 0)).finished()).asDiagonal();
        SystemSymbol sys({InvariantSymbol(spec, {s1}), InvariantSymbol(spec, {s2})});
        std::vector<CoefficientField> f{
            field_from(spec, {(Vec(2) << Cplx(0, 0), Cplx(4, 0)).finished()}),
            field_from(spec, {(Vec(2) << Cplx(0, 0), Cplx(6, 0)).finished()})};
        auto out = solve_system_normal(sys, f);
        CHECK(out.kernel_dims[0] == 1);
        CHECK((out.solution.block(0) - (Vec(2) << Cplx(0, 0), Cplx(2, 0)).finished()).norm() <=
              1e-12);
        CHECK(out.compat_failures.empty());
        // kernel-direction data is unreachable and must surface as a failure
        std::vector<CoefficientField> bad{
            field_from(spec, {(Vec(2) << Cplx(1, 0), Cplx(4, 0)).finished()}),
            field_from(spec, {(Vec(2) << Cplx(0, 0), Cplx(6, 0)).finished()})};
        auto out2 = solve_system_normal(sys, bad);
        CHECK_FALSE(out2.compat_failures.empty());
        // the kernel component of the solution stays zero
        CHECK(std::abs(out2.solution.block(0)[0]) <= 1e-12);
    }
    SUBCASE("non-normal operator is rejected") {
        auto spec = flat_spectrum(1, 2);
        Mat jordan = Mat::Zero(2, 2);
        jordan(0, 1) = 1.0;
        SystemSymbol sys({InvariantSymbol(spec, {jordan})});
        std::vector<CoefficientField> f{CoefficientField::zero(spec)};
        CHECK_THROWS_AS(solve_system_normal(sys, f), StructuralError);
    }
}

TEST_CASE("solve_system_commuting") {
    SUBCASE("coordinate frame on the torus recovers a planted profile") {
        const TorusModel torus = torus_spectrum(2, 100);
        const auto dt = torus_vector_field(torus, {BigReal(1), BigReal(0)});
        const auto dx = torus_vector_field(torus, {BigReal(0), BigReal(1)});
        SystemSymbol sys({dt, dx});
        auto spec = torus.spectrum;
        std::vector<Vec> gb;
        std::mt19937_64 rng(77);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int k = 0; k < spec->size(); ++k) {
            Vec b(spec->multiplicity(k));
            const double scale = std::pow(1.0 + spec->eigenvalue(k), -2.0);
            for (Eigen::Index i = 0; i < b.size(); ++i)
                b[i] = scale * Cplx(gauss(rng), gauss(rng));
            gb.push_back(std::move(b));
        }
        CoefficientField g(spec, gb);
        std::vector<CoefficientField> f{dt.apply(g), dx.apply(g)};
        auto out = solve_system_commuting(sys, f);
        // exact recovery off the zero block; the xi = 0 coefficient is unreachable
        for (int k = 1; k < spec->size(); ++k)
            CHECK((out.solution.block(k) - g.block(k)).norm() <= 1e-10 * g.block(k).norm());
        CHECK(std::abs(out.solution.block(0)[0]) == 0.0);
        CHECK(out.compat_failures.empty());  // planted data vanishes on the kernel
    }
    SUBCASE("dead direction with zero data is quietly minimal-norm") {
        auto spec = flat_spectrum(1, 2);
        Mat s1 = Vec((Vec(2) << Cplx(0, 0), Cplx(2, 0)).finished()).asDiagonal();
        SystemSymbol sys({InvariantSymbol(spec, {s1})});
        std::vector<CoefficientField> f{
            field_from(spec, {(Vec(2) << Cplx(0, 0), Cplx(4, 0)).finished()})};
        auto out = solve_system_commuting(sys, f);
        CHECK(out.compat_failures.empty());
        CHECK(out.solution.block(0)[0] == Cplx(0, 0));
        CHECK(out.solution.block(0)[1] == Cplx(2, 0));
    }
    SUBCASE("dead direction with nonzero data records a failure") {
        auto spec = flat_spectrum(1, 2);
        Mat s1 = Vec((Vec(2) << Cplx(0, 0), Cplx(2, 0)).finished()).asDiagonal();
        SystemSymbol sys({InvariantSymbol(spec, {s1})});
        std::vector<CoefficientField> f{
            field_from(spec, {(Vec(2) << Cplx(1, 0), Cplx(4, 0)).finished()})};
        auto out = solve_system_commuting(sys, f);
        REQUIRE(out.compat_failures.size() == 1);
        CHECK(out.compat_failures[0].deficit == doctest::Approx(1.0));
    }
}

TEST_CASE("residual") {
    auto spec = flat_spectrum(4, 3);
    std::vector<Mat> b1, b2;
    for (int k = 0; k < 4; ++k) {
        b1.push_back(random_matrix(3, 100 + k) + 3.0 * Mat::Identity(3, 3));
        b2.push_back(random_matrix(3, 200 + k));
    }
    SystemSymbol sys({InvariantSymbol(spec, b1), InvariantSymbol(spec, b2)});
    std::vector<Vec> ub;
    for (int k = 0; k < 4; ++k) ub.push_back(random_vector(3, 300 + k));
    CoefficientField u(spec, ub);
    std::vector<CoefficientField> f{sys.op(0).apply(u), sys.op(1).apply(u)};

    SUBCASE("exact solutions have vanishing residual") {
        for (double r : residual(sys, u, f)) CHECK(r <= 1e-12);
    }
    SUBCASE("the zero guess leaves the data norm") {
        const auto r = residual(sys, CoefficientField::zero(spec), f);
        for (int k = 0; k < 4; ++k) {
            const double expected = std::sqrt(f[0].block(k).squaredNorm() +
                                              f[1].block(k).squaredNorm());
            CHECK(r[static_cast<std::size_t>(k)] == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    SUBCASE("perturbations scale linearly on full-rank blocks") {
        std::vector<Vec> eb;
        for (int k = 0; k < 4; ++k) eb.push_back(random_vector(3, 400 + k).normalized());
        CoefficientField e(spec, eb);
        const auto r1 = residual(sys, combine(u, 1.0, e, 1e-6), f);
        const auto r2 = residual(sys, combine(u, 1.0, e, 2e-6), f);
        for (int k = 0; k < 4; ++k)
            CHECK(r2[static_cast<std::size_t>(k)] ==
                  doctest::Approx(2.0 * r1[static_cast<std::size_t>(k)]).epsilon(1e-4));
    }
}

TEST_CASE("oracle equivalence on random normal systems") {
    std::mt19937_64 rng(20240817);
    int done = 0;
    for (int trial = 0; done < 60; ++trial) {
        REQUIRE(trial < 500);
        const int n = 1 + static_cast<int>(rng() % 3);
        const int d = 1 + static_cast<int>(rng() % 6);
        const bool commuting = (rng() % 2) == 0;
        auto spec = flat_spectrum(1, d);
        const Mat shared_q = random_unitary(d, rng());
        std::vector<InvariantSymbol> ops;
        for (int j = 0; j < n; ++j) {
            Vec mu = random_vector(d, rng());
            for (Eigen::Index i = 0; i < d; ++i)
                if ((rng() % 4) == 0) mu[i] = 0.0;  // plant kernels
            const Mat q = commuting ? shared_q : random_unitary(d, rng());
            ops.push_back(InvariantSymbol(spec, {q.adjoint() * mu.asDiagonal() * q}));
        }
        SystemSymbol sys(std::move(ops));
        if (stacked_gain(sys, 0, false).kernel_dim > 0) continue;  // want trivial joint kernel
        ++done;

        const Vec u_true = random_vector(d, rng());
        std::vector<CoefficientField> f;
        for (int j = 0; j < n; ++j)
            f.push_back(field_from(spec, {sys.op(j).block(0) * u_true}));

        auto lsq = solve_system_lsq(sys, f);
        auto nrm = solve_system_normal(sys, f);
        const double scale = std::max(1.0, u_true.norm());
        CHECK((nrm.solution.block(0) - lsq.solution.block(0)).norm() <= 1e-8 * scale);
        CHECK(nrm.residuals[0] <= 1e-9 * scale);
        if (commuting) {
            auto com = solve_system_commuting(sys, f);
            CHECK((com.solution.block(0) - lsq.solution.block(0)).norm() <= 1e-8 * scale);
            CHECK(com.residuals[0] <= 1e-9 * scale);
        }
    }
}

TEST_CASE("minimal-norm contract and idempotence") {
    std::mt19937_64 rng(99);
    auto spec = flat_spectrum(1, 4);
    // one operator with a kernel, system kernel nontrivial on purpose
    Vec mu = (Vec(4) << Cplx(0, 0), Cplx(0, 0), Cplx(2, 1), Cplx(-1, 2)).finished();
    const Mat q = random_unitary(4, 555);
    const Mat m = q.adjoint() * mu.asDiagonal() * q;
    SystemSymbol sys({InvariantSymbol(spec, {m})});
    const Vec u_any = random_vector(4, 556);
    std::vector<CoefficientField> f{field_from(spec, {m * u_any})};

    auto out = solve_system_lsq(sys, f);
    SUBCASE("solution is orthogonal to the kernel") {
        // kernel basis: first two rows of q
        for (int i = 0; i < 2; ++i) {
            const Vec kvec = q.adjoint().col(i);
            CHECK(std::abs(kvec.dot(out.solution.block(0))) <= 1e-10);
        }
        CHECK(out.kernel_dims[0] == 2);
    }
    SUBCASE("re-solving with the reproduced data returns the same solution") {
        std::vector<CoefficientField> f2{sys.op(0).apply(out.solution)};
        auto out2 = solve_system_lsq(sys, f2);
        CHECK((out2.solution.block(0) - out.solution.block(0)).norm() <= 1e-10);
        auto out3 = solve_system_normal(sys, f2);
        CHECK((out3.solution.block(0) - out.solution.block(0)).norm() <= 1e-10);
    }
}

TEST_CASE("stability estimate on planted gains") {
    auto sphere = sphere_spectrum(60);
    SyntheticRecipe recipe;
    recipe.kind = SyntheticRecipe::Kind::planted_gain;
    recipe.exponent = -1.0;  // gains (1+lambda)^{t/nu} with t = -2, nu = 2
    const auto planted = synthetic_symbol(sphere.spectrum, recipe, 7);
    const double t = -2.0;

    std::mt19937_64 rng(31337);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Vec> fb;
        for (int k = 0; k < sphere.spectrum->size(); ++k) {
            Vec b(sphere.spectrum->multiplicity(k));
            const double amp = std::pow(1.0 + sphere.spectrum->eigenvalue(k), -4.0);
            for (Eigen::Index i = 0; i < b.size(); ++i)
                b[i] = amp * Cplx(gauss(rng), gauss(rng));
            fb.push_back(std::move(b));
        }
        CoefficientField f(sphere.spectrum, fb);
        auto out = solve_single(planted.symbol, f);
        for (double s : {0.0, 1.0}) {
            CHECK(out.solution.sobolev_norm(s + t) <=
                  (1.0 + 1e-9) * f.sobolev_norm(s));
        }
    }
}
