#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "specop/field.hpp"
#include "specop/models.hpp"

using namespace specop;

namespace {

std::shared_ptr<const SpectrumModel> sphere_like(int kmax) {
    std::vector<BlockInfo> blocks;
    for (int k = 0; k <= kmax; ++k)
        blocks.push_back({k, static_cast<double>(k) * (k + 1), 2 * k + 1, ""});
    return std::make_shared<SpectrumModel>(2, 2.0, std::move(blocks));
}

// unit vector along the first coordinate of each block, scaled per block
CoefficientField profile_field(std::shared_ptr<const SpectrumModel> spec,
                               double (*amp)(double lambda)) {
    std::vector<Vec> blocks;
    for (int k = 0; k < spec->size(); ++k) {
        Vec b = Vec::Zero(spec->multiplicity(k));
        b[0] = amp(spec->eigenvalue(k));
        blocks.push_back(std::move(b));
    }
    return CoefficientField(std::move(spec), std::move(blocks));
}

CoefficientField random_field(std::shared_ptr<const SpectrumModel> spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Vec> blocks;
    for (int k = 0; k < spec->size(); ++k) {
        Vec b(spec->multiplicity(k));
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = Cplx(gauss(rng), gauss(rng));
        blocks.push_back(std::move(b));
    }
    return CoefficientField(std::move(spec), std::move(blocks));
}

}  // namespace

TEST_CASE("l2 norm basics") {
    auto one_block = std::make_shared<SpectrumModel>(1, 1.0, std::vector<BlockInfo>{{0, 0.0, 2, ""}});
    CoefficientField u(one_block, {(Vec(2) << Cplx(3, 0), Cplx(4, 0)).finished()});
    CHECK(u.l2_norm() == doctest::Approx(5.0).epsilon(1e-15));

    auto spec3 = std::make_shared<SpectrumModel>(
        1, 1.0, std::vector<BlockInfo>{{0, 0.0, 2, ""}, {1, 1.0, 2, ""}, {2, 2.0, 1, ""}});
    CHECK(CoefficientField::zero(spec3).l2_norm() == 0.0);
    CoefficientField w(spec3, {(Vec(2) << Cplx(1, 0), Cplx(0, 0)).finished(),
                               (Vec(2) << Cplx(0, 0), Cplx(2, 0)).finished(),
                               (Vec(1) << Cplx(2, 0)).finished()});
    CHECK(w.l2_norm() == doctest::Approx(3.0).epsilon(1e-15));  // sqrt(1+4+4)
}

TEST_CASE("sobolev norm closed forms") {
    auto one = std::make_shared<SpectrumModel>(1, 2.0, std::vector<BlockInfo>{{0, 3.0, 1, ""}});
    CoefficientField u(one, {(Vec(1) << Cplx(2, 0)).finished()});
    CHECK(u.sobolev_norm(1.0) == doctest::Approx(4.0).epsilon(1e-14));  // (1+3)^{1/2} * 2

    auto spec = sphere_like(12);
    auto r = random_field(spec, 7);
    CHECK(r.sobolev_norm(0.0) == doctest::Approx(r.l2_norm()).epsilon(1e-14));

    auto four = sphere_like(3);
    auto unit = profile_field(four, [](double) { return 1.0; });
    CHECK(unit.sobolev_norm(2.0) == doctest::Approx(std::sqrt(228.0)).epsilon(1e-14));
}

TEST_CASE("sobolev norm is monotone in s") {
    auto spec = sphere_like(30);
    auto u = random_field(spec, 42);
    double prev = u.sobolev_norm(-2.0);
    for (double s : {-1.0, 0.0, 1.0, 2.0}) {
        const double cur = u.sobolev_norm(s);
        CHECK(prev <= cur * (1.0 + 1e-12));
        prev = cur;
    }
}

TEST_CASE("combine") {
    auto spec = sphere_like(8);
    auto u = random_field(spec, 1);
    auto v = random_field(spec, 2);
    SUBCASE("u - u vanishes") {
        CHECK(combine(u, 1.0, u, -1.0).l2_norm() == 0.0);
    }
    SUBCASE("2u against zero partner") {
        auto two_u = combine(u, 2.0, CoefficientField::zero(spec), 0.0);
        CHECK(two_u.l2_norm() == doctest::Approx(2.0 * u.l2_norm()).epsilon(1e-14));
    }
    SUBCASE("triangle inequality on random fields") {
        for (std::uint64_t s = 0; s < 20; ++s) {
            auto a = random_field(spec, 100 + s);
            auto b = random_field(spec, 200 + s);
            CHECK(combine(a, 1.0, b, 1.0).l2_norm() <=
                  a.l2_norm() + b.l2_norm() + 1e-12);
        }
    }
    SUBCASE("spectrum mismatch is rejected") {
        auto other = sphere_like(9);
        CHECK_THROWS_AS(combine(u, 1.0, random_field(other, 3), 1.0), StructuralError);
    }
}

TEST_CASE("Plancherel additivity on disjoint supports") {
    auto spec = sphere_like(20);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Vec> a_blocks, b_blocks;
    for (int k = 0; k <= 20; ++k) {
        Vec a = Vec::Zero(2 * k + 1), b = Vec::Zero(2 * k + 1);
        Vec& target = (k % 2 == 0) ? a : b;
        for (Eigen::Index i = 0; i < target.size(); ++i)
            target[i] = Cplx(gauss(rng), gauss(rng));
        a_blocks.push_back(std::move(a));
        b_blocks.push_back(std::move(b));
    }
    CoefficientField u(spec, std::move(a_blocks)), v(spec, std::move(b_blocks));
    const auto sum = combine(u, 1.0, v, 1.0);
    const double lhs = u.l2_norm() * u.l2_norm() + v.l2_norm() * v.l2_norm();
    const double rhs = sum.l2_norm() * sum.l2_norm();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("decay classification") {
    auto spec = sphere_like(119);
    SUBCASE("inverse-cube profile fits slope -3") {
        auto u = profile_field(spec, [](double l) { return std::pow(1.0 + l, -3.0); });
        const auto rep = decay_classify(u);
        CHECK(rep.cls == DecayClass::polynomial);
        CHECK(rep.slope == doctest::Approx(-3.0).epsilon(0.05 / 3.0));
    }
    SUBCASE("polynomial order recovered within 0.1 for N = 1..8") {
        for (int n = 1; n <= 8; ++n) {
            const double nn = n;
            std::vector<Vec> blocks;
            for (int k = 0; k < spec->size(); ++k) {
                Vec b = Vec::Zero(spec->multiplicity(k));
                b[0] = std::pow(1.0 + spec->eigenvalue(k), -nn);
                blocks.push_back(std::move(b));
            }
            CoefficientField u(spec, std::move(blocks));
            const auto rep = decay_classify(u);
            CHECK(rep.cls == DecayClass::polynomial);
            CHECK(std::abs(rep.slope + nn) < 0.1);
        }
    }
    SUBCASE("exponential decay classifies rapid") {
        auto u = profile_field(spec, [](double l) { return std::exp(-0.04 * l); });
        const auto rep = decay_classify(u);
        CHECK(rep.cls == DecayClass::rapid_decay);
    }
    SUBCASE("growing coefficients classify as finite-order distribution") {
        auto u = profile_field(spec, [](double l) { return (1.0 + l) * (1.0 + l); });
        const auto rep = decay_classify(u);
        CHECK(rep.cls == DecayClass::polynomial);
        CHECK(rep.slope == doctest::Approx(2.0).epsilon(0.025));
    }
    SUBCASE("super-polynomial growth classifies non-tempered") {
        auto small = sphere_like(60);
        auto u = profile_field(small, [](double l) { return std::exp(0.04 * l); });
        const auto rep = decay_classify(u);
        CHECK(rep.cls == DecayClass::non_tempered);
    }
    SUBCASE("all-zero tail falls back to the finite-support convention") {
        std::vector<Vec> blocks;
        for (int k = 0; k < spec->size(); ++k) {
            Vec b = Vec::Zero(spec->multiplicity(k));
            if (k < 3) b[0] = 1.0;
            blocks.push_back(std::move(b));
        }
        const auto rep = decay_classify(CoefficientField(spec, std::move(blocks)));
        CHECK(rep.cls == DecayClass::rapid_decay);
    }
    SUBCASE("too few nonzero tail samples is inconclusive, not an error") {
        std::vector<Vec> blocks;
        for (int k = 0; k < spec->size(); ++k) {
            Vec b = Vec::Zero(spec->multiplicity(k));
            if (k == 100 || k == 110) b[0] = 1.0;
            blocks.push_back(std::move(b));
        }
        const auto rep = decay_classify(CoefficientField(spec, std::move(blocks)));
        CHECK(rep.cls == DecayClass::inconclusive);
    }
}

TEST_CASE("field validation") {
    auto spec = sphere_like(2);
    SUBCASE("wrong block length") {
        std::vector<Vec> blocks{Vec::Zero(1), Vec::Zero(3), Vec::Zero(4)};
        CHECK_THROWS_AS(CoefficientField(spec, std::move(blocks)), InputError);
    }
    SUBCASE("missing trailing blocks are rejected, not zero-filled") {
        std::vector<Vec> blocks{Vec::Zero(1), Vec::Zero(3)};
        CHECK_THROWS_AS(CoefficientField(spec, std::move(blocks)), InputError);
    }
    SUBCASE("non-finite entries are rejected") {
        std::vector<Vec> blocks{Vec::Zero(1), Vec::Zero(3), Vec::Zero(5)};
        blocks[1][0] = Cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
        CHECK_THROWS_AS(CoefficientField(spec, std::move(blocks)), InputError);
    }
}
