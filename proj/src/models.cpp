#include "specop/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <Eigen/Dense>

namespace specop {

namespace {

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return std::mt19937_64(z ^ (z >> 31));
}

Mat haar_unitary(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = Cplx(gauss(rng), gauss(rng));
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ() * Mat::Identity(d, d);
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
        const Cplx rjj = r(j, j);
        const double a = std::abs(rjj);
        if (a > 0.0) q.col(j) *= rjj / a;
    }
    return q;
}

}  // namespace

// ---- Diophantine coefficients -------------------------------------------------

DiophantineCoefficient DiophantineCoefficient::rational(long long p, long long q) {
    if (q == 0) throw InputError("DiophantineCoefficient: zero denominator");
    DiophantineCoefficient c;
    c.kind = Kind::rational;
    c.value = BigReal(p) / BigReal(q);
    c.description = std::to_string(p) + "/" + std::to_string(q);
    return c;
}

DiophantineCoefficient DiophantineCoefficient::golden_ratio() {
    DiophantineCoefficient c;
    c.kind = Kind::quadratic_irrational;
    c.value = (BigReal(1) + sqrt(BigReal(5))) / BigReal(2);
    c.description = "(1+sqrt(5))/2";
    return c;
}

DiophantineCoefficient DiophantineCoefficient::liouville(int terms) {
    // 6! = 720 digits would exceed the working precision; keep the factorial
    // powers exactly representable
    if (terms < 1 || terms > 5)
        throw InputError("DiophantineCoefficient: liouville terms must lie in [1,5]");
    DiophantineCoefficient c;
    c.kind = Kind::liouville;
    c.value = 0;
    unsigned long long fact = 1;
    for (int j = 1; j <= terms; ++j) {
        fact *= static_cast<unsigned long long>(j);
        c.value += BigReal(1) / pow(BigReal(10), static_cast<unsigned>(fact));
    }
    c.description = "liouville(" + std::to_string(terms) + ")";
    return c;
}

DiophantineCoefficient DiophantineCoefficient::from_decimal(const std::string& text) {
    DiophantineCoefficient c;
    c.kind = Kind::decimal;
    try {
        c.value = BigReal(text);
    } catch (const std::exception&) {
        throw InputError("DiophantineCoefficient: cannot parse '" + text + "' as a decimal");
    }
    c.description = text;
    return c;
}

DiophantineCoefficient DiophantineCoefficient::parse(const std::string& token) {
    if (token == "golden") return golden_ratio();
    if (token == "liouville") return liouville();
    if (token.rfind("liouville:", 0) == 0) {
        const int terms = std::stoi(token.substr(10));
        return liouville(terms);
    }
    if (token.rfind("rational:", 0) == 0) {
        const std::string body = token.substr(9);
        const auto slash = body.find('/');
        if (slash == std::string::npos)
            throw InputError("DiophantineCoefficient: rational token needs p/q");
        return rational(std::stoll(body.substr(0, slash)), std::stoll(body.substr(slash + 1)));
    }
    return from_decimal(token);
}

// ---- torus --------------------------------------------------------------------

TorusModel torus_spectrum(int dim, long long rsq) {
    if (dim < 1 || dim > 3) throw InputError("torus_spectrum: dim must be 1, 2 or 3");
    if (rsq < 0) throw InputError("torus_spectrum: negative radius");
    const int r = static_cast<int>(std::floor(std::sqrt(static_cast<double>(rsq)))) + 1;

    std::map<long long, std::vector<std::array<int, 3>>> by_norm;
    auto visit = [&](int x, int y, int z) {
        const long long m = 1LL * x * x + 1LL * y * y + 1LL * z * z;
        if (m <= rsq) by_norm[m].push_back({x, y, z});
    };
    if (dim == 1) {
        for (int x = -r; x <= r; ++x) visit(x, 0, 0);
    } else if (dim == 2) {
        for (int x = -r; x <= r; ++x)
            for (int y = -r; y <= r; ++y) visit(x, y, 0);
    } else {
        for (int x = -r; x <= r; ++x)
            for (int y = -r; y <= r; ++y)
                for (int z = -r; z <= r; ++z) visit(x, y, z);
    }

    TorusModel model;
    model.dim = dim;
    model.radius_sq_max = rsq;
    std::vector<BlockInfo> blocks;
    for (auto& [m, pts] : by_norm) {
        std::sort(pts.begin(), pts.end());
        std::ostringstream label;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) label << ";";
            label << "(" << pts[i][0];
            if (dim >= 2) label << "," << pts[i][1];
            if (dim >= 3) label << "," << pts[i][2];
            label << ")";
        }
        BlockInfo b;
        b.eigenvalue = static_cast<double>(m);
        b.multiplicity = static_cast<int>(pts.size());
        b.label = label.str();
        blocks.push_back(std::move(b));
        model.basis.push_back(std::move(pts));
    }
    model.spectrum = std::make_shared<SpectrumModel>(dim, 2.0, std::move(blocks));
    return model;
}

InvariantSymbol torus_vector_field(const TorusModel& model, const std::vector<BigReal>& a) {
    if (static_cast<int>(a.size()) != model.dim)
        throw InputError("torus_vector_field: coefficient count must equal the torus dimension");
    std::vector<Mat> blocks;
    blocks.reserve(model.basis.size());
    for (const auto& pts : model.basis) {
        Mat b = Mat::Zero(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(pts.size()));
        for (std::size_t i = 0; i < pts.size(); ++i) {
            BigReal dot = 0;
            for (int c = 0; c < model.dim; ++c)
                dot += a[static_cast<std::size_t>(c)] * pts[i][static_cast<std::size_t>(c)];
            // extended precision up to here; one rounding when forming the entry
            b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
                Cplx(0.0, dot.convert_to<double>());
        }
        blocks.push_back(std::move(b));
    }
    return InvariantSymbol(model.spectrum, std::move(blocks));
}

// ---- sphere -------------------------------------------------------------------

SphereModel sphere_spectrum(int degree_max) {
    if (degree_max < 1) throw InputError("sphere_spectrum: degree_max must be >= 1");
    std::vector<BlockInfo> blocks;
    for (int k = 0; k <= degree_max; ++k) {
        BlockInfo b;
        b.eigenvalue = static_cast<double>(k) * (k + 1);
        b.multiplicity = 2 * k + 1;
        b.label = "m=" + std::to_string(-k) + ".." + std::to_string(k);
        blocks.push_back(std::move(b));
    }
    SphereModel model;
    model.degree_max = degree_max;
    model.spectrum = std::make_shared<SpectrumModel>(2, 2.0, std::move(blocks));
    return model;
}

InvariantSymbol sphere_rotation_field(const SphereModel& model) {
    std::vector<Mat> blocks;
    for (int k = 0; k <= model.degree_max; ++k) {
        const int d = 2 * k + 1;
        Mat b = Mat::Zero(d, d);
        for (int m = -k; m <= k; ++m) b(m + k, m + k) = Cplx(0.0, static_cast<double>(m));
        blocks.push_back(std::move(b));
    }
    return InvariantSymbol(model.spectrum, std::move(blocks));
}

// ---- synthetic symbols ---------------------------------------------------------

SyntheticRecipe SyntheticRecipe::parse(const std::string& token) {
    SyntheticRecipe r;
    auto num_after = [&](std::size_t pos) { return std::stod(token.substr(pos)); };
    if (token.rfind("profile-pow:", 0) == 0) {
        r.kind = Kind::profile_power;
        r.exponent = num_after(12);
    } else if (token.rfind("profile-exp:", 0) == 0) {
        r.kind = Kind::profile_exp;
        r.rate = num_after(12);
    } else if (token == "normal") {
        r.kind = Kind::random_normal;
    } else if (token == "general") {
        r.kind = Kind::random_general;
    } else if (token.rfind("planted:", 0) == 0) {
        r.kind = Kind::planted_gain;
        r.exponent = num_after(8);
    } else {
        throw InputError("SyntheticRecipe: unknown recipe '" + token + "'");
    }
    return r;
}

std::string SyntheticRecipe::to_string() const {
    switch (kind) {
        case Kind::profile_power: return "profile-pow:" + std::to_string(exponent);
        case Kind::profile_exp: return "profile-exp:" + std::to_string(rate);
        case Kind::random_normal: return "normal";
        case Kind::random_general: return "general";
        case Kind::planted_gain: return "planted:" + std::to_string(exponent);
    }
    return "?";
}

SyntheticSymbol synthetic_symbol(std::shared_ptr<const SpectrumModel> spectrum,
                                 const SyntheticRecipe& recipe, std::uint64_t seed) {
    if (!spectrum) throw InputError("synthetic_symbol: null spectrum");
    std::vector<Mat> blocks;
    std::vector<double> planted;
    for (int k = 0; k < spectrum->size(); ++k) {
        const int d = spectrum->multiplicity(k);
        const double lambda = spectrum->eigenvalue(k);
        auto rng = seeded_rng(seed, static_cast<std::uint64_t>(k));
        switch (recipe.kind) {
            case SyntheticRecipe::Kind::profile_power: {
                const double g = recipe.coef * std::pow(1.0 + lambda, recipe.exponent);
                blocks.push_back(g * Mat::Identity(d, d));
                planted.push_back(g);
                break;
            }
            case SyntheticRecipe::Kind::profile_exp: {
                const double g = recipe.coef * std::exp(-recipe.rate * lambda);
                blocks.push_back(g * Mat::Identity(d, d));
                planted.push_back(g);
                break;
            }
            case SyntheticRecipe::Kind::random_normal: {
                const Mat q = haar_unitary(d, rng);
                std::uniform_real_distribution<double> mod(0.25, 2.0);
                std::uniform_real_distribution<double> arg(0.0, 2.0 * M_PI);
                Vec mu(d);
                for (int i = 0; i < d; ++i) mu[i] = std::polar(mod(rng), arg(rng));
                blocks.push_back(q * mu.asDiagonal() * q.adjoint());
                break;
            }
            case SyntheticRecipe::Kind::random_general: {
                std::normal_distribution<double> gauss(0.0, 1.0);
                Mat b(d, d);
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j)
                        b(i, j) = Cplx(gauss(rng), gauss(rng)) / std::sqrt(2.0 * d);
                blocks.push_back(std::move(b));
                break;
            }
            case SyntheticRecipe::Kind::planted_gain: {
                const double smin = std::pow(1.0 + lambda, recipe.exponent);
                Eigen::VectorXd sv(d);
                for (int i = 0; i < d; ++i)
                    sv[i] = smin * (1.0 + recipe.spread * static_cast<double>(i) / d);
                const Mat u = haar_unitary(d, rng);
                const Mat v = haar_unitary(d, rng);
                blocks.push_back(u * sv.asDiagonal() * v.adjoint());
                planted.push_back(smin);
                break;
            }
        }
    }
    return {InvariantSymbol(std::move(spectrum), std::move(blocks)), std::move(planted)};
}

// ---- continued fractions -------------------------------------------------------

namespace detail {

std::vector<std::pair<long long, long long>> convergents(const BigReal& x, long long max_q,
                                                         int max_terms) {
    std::vector<std::pair<long long, long long>> out;
    BigReal t = x;
    __int128 p_m2 = 0, p_m1 = 1;
    __int128 q_m2 = 1, q_m1 = 0;
    for (int i = 0; i < max_terms; ++i) {
        const BigReal fl = floor(t);
        if (fl > BigReal(max_q) * BigReal(max_q)) break;  // coefficient out of range
        const __int128 a = static_cast<__int128>(fl.convert_to<long long>());
        const __int128 p = a * p_m1 + p_m2;
        const __int128 q = a * q_m1 + q_m2;
        if (q > static_cast<__int128>(max_q) || q <= 0) break;
        out.emplace_back(static_cast<long long>(p), static_cast<long long>(q));
        p_m2 = p_m1;
        p_m1 = p;
        q_m2 = q_m1;
        q_m1 = q;
        const BigReal frac = t - fl;
        if (frac == 0) break;
        t = BigReal(1) / frac;
    }
    return out;
}

}  // namespace detail

}  // namespace specop
