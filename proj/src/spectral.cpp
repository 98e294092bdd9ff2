#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "aperiodic/substitution.hpp"

namespace aperiodic {

namespace {

using MatrixLd = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorLd = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

Eigen::MatrixXd to_double(const IntMatrix& m) {
    const auto n = static_cast<Eigen::Index>(m.size());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            a(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get_d();
        }
    }
    return a;
}

IntMatrix transpose(const IntMatrix& m) {
    IntMatrix t(m.size(), std::vector<BigInt>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            t[j][i] = m[i][j];
        }
    }
    return t;
}

// Kernel vector of (A - lambda I) by exact elimination; the first free column is set to 1.
std::vector<RealValue> exact_null_vector(const IntMatrix& a, const RealValue& lambda) {
    const std::size_t n = a.size();
    std::vector<std::vector<RealValue>> r(n, std::vector<RealValue>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            r[i][j] = RealValue(Rational(a[i][j]));
        }
        r[i][i] = r[i][i] - lambda;
    }
    std::vector<std::size_t> pivot_col;
    std::size_t row = 0;
    for (std::size_t c = 0; c < n && row < n; ++c) {
        std::size_t p = row;
        while (p < n && r[p][c].is_zero()) {
            ++p;
        }
        if (p == n) {
            continue;
        }
        std::swap(r[p], r[row]);
        RealValue inv = RealValue(Rational(1)) / r[row][c];
        for (std::size_t j = c; j < n; ++j) {
            r[row][j] = r[row][j] * inv;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i != row && !r[i][c].is_zero()) {
                RealValue f = r[i][c];
                for (std::size_t j = c; j < n; ++j) {
                    r[i][j] = r[i][j] - f * r[row][j];
                }
            }
        }
        pivot_col.push_back(c);
        ++row;
    }
    std::size_t free_col = n;
    for (std::size_t c = 0; c < n; ++c) {
        if (std::find(pivot_col.begin(), pivot_col.end(), c) == pivot_col.end()) {
            free_col = c;
            break;
        }
    }
    if (free_col == n) {
        throw NumericalFailure("eigenvalue is not exact: (M - lambda I) has full rank");
    }
    std::vector<RealValue> x(n, RealValue(Rational(0)));
    x[free_col] = RealValue(Rational(1));
    for (std::size_t k = 0; k < pivot_col.size(); ++k) {
        x[pivot_col[k]] = -r[k][free_col];
    }
    return x;
}

// Inverse iteration in long double precision.
std::vector<RealValue> numeric_null_vector(const IntMatrix& a, long double lambda) {
    const auto n = static_cast<Eigen::Index>(a.size());
    MatrixLd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            m(i, j) = static_cast<long double>(a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get_d());
        }
    }
    long double shift = lambda * (1 + 1e-12L) + 1e-15L;
    MatrixLd s = m - shift * MatrixLd::Identity(n, n);
    Eigen::PartialPivLU<MatrixLd> lu(s);
    VectorLd x = VectorLd::Ones(n);
    for (int it = 0; it < 8; ++it) {
        x = lu.solve(x);
        x /= x.cwiseAbs().maxCoeff();
    }
    VectorLd res = m * x - lambda * x;
    long double resid = res.cwiseAbs().maxCoeff();
    std::vector<RealValue> out;
    for (Eigen::Index i = 0; i < n; ++i) {
        double v = static_cast<double>(x(i));
        double err = std::abs(v) * 1e-13 + static_cast<double>(resid) * 10.0 + 1e-15;
        out.push_back(RealValue::approx(v, err));
    }
    return out;
}

// Exact lambda when it is an integer or a quadratic irrational; empty otherwise.
std::optional<RealValue> exact_root(const Polynomial& p, double lambda, const std::vector<std::complex<double>>& others) {
    double r = std::round(lambda);
    if (std::abs(lambda - r) < 1e-6 && sgn(poly_eval(p, Rational(r))) == 0) {
        return RealValue(Rational(r));
    }
    for (const auto& mu : others) {
        if (std::abs(mu.imag()) > 1e-7) {
            continue;
        }
        double sum = lambda + mu.real();
        double prod = lambda * mu.real();
        double s = std::round(sum);
        double t = std::round(prod);
        if (std::abs(sum - s) > 1e-6 || std::abs(prod - t) > 1e-6) {
            continue;
        }
        Polynomial q = {Rational(t), Rational(-s), Rational(1)};
        Polynomial rem;
        poly_divide(p, q, rem);
        if (!rem.empty()) {
            continue;
        }
        BigInt disc = BigInt(s) * BigInt(s) - 4 * BigInt(t);
        if (disc <= 0 || !disc.fits_slong_p()) {
            continue;
        }
        auto [k, d] = square_free_split(disc.get_si());
        if (d == 1) {
            continue;
        }
        // larger root (s + k sqrt(d)) / 2, or the smaller one if lambda is the smaller.
        Rational half_k(k, 2);
        half_k.canonicalize();
        QuadraticElement big(Rational(BigInt(s), 2), half_k, d);
        QuadraticElement small(Rational(BigInt(s), 2), -half_k, d);
        return RealValue(lambda >= mu.real() ? big : small);
    }
    return std::nullopt;
}

void normalize_first(std::vector<RealValue>& v) {
    for (const auto& x : v) {
        if (x.is_exact() ? !x.is_zero() : std::abs(x.to_double()) > 1e-12) {
            RealValue f = RealValue(Rational(1)) / x;
            for (auto& y : v) {
                y = y * f;
            }
            return;
        }
    }
}

void normalize_sum(std::vector<RealValue>& v) {
    RealValue total;
    for (const auto& x : v) {
        total += x;
    }
    RealValue f = RealValue(Rational(1)) / total;
    for (auto& y : v) {
        y = y * f;
    }
}

std::optional<int> find_diagonalizable_power(const IntMatrix& m, const Polynomial& cp,
                                             const std::vector<std::complex<double>>& eig, double tol) {
    const std::size_t n = m.size();
    std::size_t mult0 = 0;
    while (mult0 < cp.size() && sgn(cp[mult0]) == 0) {
        ++mult0;
    }
    const std::size_t nonzero = n - mult0;
    std::vector<std::complex<double>> nz = eig;
    std::sort(nz.begin(), nz.end(), [](auto a, auto b) { return std::abs(a) > std::abs(b); });
    nz.resize(nonzero);
    for (std::size_t p = 1; p <= n; ++p) {
        IntMatrix mp = matrix_power(m, static_cast<unsigned>(p));
        if (matrix_rank(mp) != nonzero) {
            continue;
        }
        std::vector<std::complex<double>> pw;
        for (auto z : nz) {
            pw.push_back(std::pow(z, static_cast<double>(p)));
        }
        bool ok = true;
        std::vector<bool> seen(pw.size(), false);
        for (std::size_t i = 0; i < pw.size() && ok; ++i) {
            if (seen[i]) {
                continue;
            }
            std::size_t mult = 1;
            for (std::size_t j = i + 1; j < pw.size(); ++j) {
                if (std::abs(pw[i] - pw[j]) <= tol * std::max(1.0, std::abs(pw[i]))) {
                    seen[j] = true;
                    ++mult;
                }
            }
            if (mult == 1) {
                continue;
            }
            // A repeated eigenvalue is only accepted when it is an integer and semisimple.
            double re = std::round(pw[i].real());
            if (std::abs(pw[i].imag()) > tol || std::abs(pw[i].real() - re) > tol) {
                ok = false;
                break;
            }
            IntMatrix shifted = mp;
            for (std::size_t k = 0; k < n; ++k) {
                shifted[k][k] -= BigInt(re);
            }
            if (matrix_rank(shifted) != n - mult) {
                ok = false;
            }
        }
        if (ok) {
            return static_cast<int>(p);
        }
    }
    return std::nullopt;
}

} // namespace

bool is_primitive_matrix(const IntMatrix& m) {
    const std::size_t n = m.size();
    std::vector<std::vector<bool>> b(n, std::vector<bool>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            b[i][j] = m[i][j] > 0;
        }
    }
    auto mul = [n](const auto& x, const auto& y) {
        std::vector<std::vector<bool>> z(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                if (!x[i][k]) {
                    continue;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    if (y[k][j]) {
                        z[i][j] = true;
                    }
                }
            }
        }
        return z;
    };
    std::size_t p = (n - 1) * n + 1;
    std::vector<std::vector<bool>> result;
    std::vector<std::vector<bool>> base = b;
    bool have = false;
    while (p > 0) {
        if (p & 1U) {
            result = have ? mul(result, base) : base;
            have = true;
        }
        p >>= 1U;
        if (p > 0) {
            base = mul(base, base);
        }
    }
    for (const auto& row : result) {
        for (bool x : row) {
            if (!x) {
                return false;
            }
        }
    }
    return true;
}

PerronData classify(const Substitution& s, double tol) {
    const IntMatrix m = substitution_matrix(s);
    const std::size_t n = m.size();
    PerronData pd;
    pd.is_primitive = is_primitive_matrix(m);
    pd.char_poly = characteristic_polynomial(m);

    Eigen::EigenSolver<Eigen::MatrixXd> es(to_double(m), false);
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("eigenvalue solver did not converge");
    }
    std::vector<std::complex<double>> eig;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        std::complex<double> z = es.eigenvalues()(i);
        std::complex<double> pz = polish_complex_root(pd.char_poly, z);
        if (std::isfinite(pz.real()) && std::abs(pz - z) < 1e-6 * std::max(1.0, std::abs(z))) {
            z = pz;
        }
        if (std::abs(z.imag()) < 1e-12 * std::max(1.0, std::abs(z))) {
            z = {z.real(), 0.0};
        }
        eig.push_back(z);
    }
    std::size_t li = 0;
    for (std::size_t i = 0; i < eig.size(); ++i) {
        bool real = eig[i].imag() == 0.0;
        bool best_real = eig[li].imag() == 0.0;
        if (real && (!best_real || eig[i].real() > eig[li].real())) {
            li = i;
        }
    }
    const double lam = eig[li].real();
    std::vector<std::complex<double>> others;
    for (std::size_t i = 0; i < eig.size(); ++i) {
        if (i != li) {
            others.push_back(eig[i]);
        }
    }
    std::sort(others.begin(), others.end(), [](auto a, auto b) {
        if (std::abs(a) != std::abs(b)) {
            return std::abs(a) > std::abs(b);
        }
        return a.imag() > b.imag();
    });
    pd.conjugates = others;
    pd.c_sigma = 0.0;
    for (auto z : others) {
        pd.c_sigma = std::max(pd.c_sigma, std::abs(z));
    }

    if (auto ex = exact_root(pd.char_poly, lam, others)) {
        pd.lambda = *ex;
    } else {
        double d = 1e-6 * std::max(1.0, std::abs(lam));
        try {
            pd.lambda = RealValue(polish_real_root(pd.char_poly, lam - d, lam + d));
        } catch (const NumericalFailure&) {
            pd.lambda = RealValue::approx(lam, d);
        }
    }

    if (pd.lambda.is_exact()) {
        pd.left_eigvec = exact_null_vector(transpose(m), pd.lambda);
        pd.right_eigvec_normalized = exact_null_vector(m, pd.lambda);
    } else {
        pd.left_eigvec = numeric_null_vector(transpose(m), pd.lambda.to_long_double());
        pd.right_eigvec_normalized = numeric_null_vector(m, pd.lambda.to_long_double());
    }
    normalize_first(pd.left_eigvec);
    normalize_sum(pd.right_eigvec_normalized);

    pd.mean_spacing = RealValue();
    for (std::size_t i = 0; i < n; ++i) {
        pd.mean_spacing += pd.right_eigvec_normalized[i] * pd.left_eigvec[i];
    }
    // Reducible matrices can have l.v = 0; density is left at zero then.
    if (std::abs(pd.mean_spacing.to_double()) > 1e-300) {
        pd.density = RealValue(Rational(1)) / pd.mean_spacing;
    }

    pd.is_pisot = pd.is_primitive && lam > 1.0 && pd.c_sigma < 1.0;
    pd.diagonalizable_power = find_diagonalizable_power(m, pd.char_poly, eig, tol);
    return pd;
}

PerronData with_first_tile_length(const PerronData& pd, const RealValue& first_length) {
    PerronData out = pd;
    RealValue f = first_length / pd.left_eigvec.at(0);
    for (auto& l : out.left_eigvec) {
        l = l * f;
    }
    out.mean_spacing = pd.mean_spacing * f;
    out.density = RealValue(Rational(1)) / out.mean_spacing;
    return out;
}

ErrorProfile error_profile(const Substitution& s, const PerronData& pd, int max_level) {
    if (!pd.is_pisot) {
        throw NotPisot("error profile needs a primitive Pisot substitution");
    }
    if (!pd.diagonalizable_power) {
        throw NotDiagonalizable("no power M^p with p <= m is diagonalizable");
    }
    if (max_level < 0) {
        throw std::invalid_argument("max_level must be >= 0");
    }
    const IntMatrix m = substitution_matrix(s);
    const std::size_t n = m.size();
    const auto levels = static_cast<std::size_t>(max_level) + 1;
    const int p = *pd.diagonalizable_power;
    const RealValue& a = pd.mean_spacing;

    ErrorProfile ep;
    ep.max_level = max_level;
    ep.c_sigma = pd.c_sigma;
    ep.n_tiles = static_cast<double>(s.max_image_length());
    ep.delta.assign(n, std::vector<double>(levels));

    // delta[j][k] = lambda^k l_j - n^j_k a
    bool exact = pd.lambda.is_exact() && a.is_exact();
    for (const auto& l : pd.left_eigvec) {
        exact = exact && l.is_exact();
    }
    if (exact) {
        RealValue lk(Rational(1));
        IntMatrix mk = matrix_power(m, 0);
        for (std::size_t k = 0; k < levels; ++k) {
            for (std::size_t j = 0; j < n; ++j) {
                BigInt count(0);
                for (std::size_t i = 0; i < n; ++i) {
                    count += mk[i][j];
                }
                RealValue d = lk * pd.left_eigvec[j] - RealValue(Rational(count)) * a;
                ep.delta[j][k] = d.to_double();
            }
            lk = lk * pd.lambda;
            mk = matrix_multiply(mk, m);
        }
    } else {
        // delta_k^T = delta_0^T M^k; the Perron component is projected out every step.
        std::vector<long double> l(n), v(n), d(n);
        long double lv = 0;
        long double al = a.to_long_double();
        for (std::size_t i = 0; i < n; ++i) {
            l[i] = pd.left_eigvec[i].to_long_double();
            v[i] = pd.right_eigvec_normalized[i].to_long_double();
            d[i] = l[i] - al;
            lv += l[i] * v[i];
        }
        for (std::size_t k = 0; k < levels; ++k) {
            long double dv = 0;
            for (std::size_t i = 0; i < n; ++i) {
                dv += d[i] * v[i];
            }
            for (std::size_t i = 0; i < n; ++i) {
                d[i] -= dv / lv * l[i];
                ep.delta[i][k] = static_cast<double>(d[i]);
            }
            std::vector<long double> next(n, 0);
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t i = 0; i < n; ++i) {
                    next[j] += d[i] * static_cast<long double>(m[i][j].get_d());
                }
            }
            d = next;
        }
    }

    // Supertile recursion over children: offsets are partial sums of child deltas.
    ep.deviation_hi.assign(n, std::vector<double>(levels));
    ep.deviation_lo.assign(n, std::vector<double>(levels));
    ep.epsilon.assign(n, std::vector<double>(levels));
    for (std::size_t i = 0; i < n; ++i) {
        ep.deviation_hi[i][0] = ep.deviation_lo[i][0] = ep.delta[i][0];
        ep.epsilon[i][0] = std::abs(ep.delta[i][0]);
    }
    for (std::size_t k = 1; k < levels; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            long double offset = 0;
            long double hi = -std::numeric_limits<long double>::infinity();
            long double lo = std::numeric_limits<long double>::infinity();
            for (int c : s.image(static_cast<int>(i))) {
                const auto cc = static_cast<std::size_t>(c);
                hi = std::max(hi, offset + ep.deviation_hi[cc][k - 1]);
                lo = std::min(lo, offset + ep.deviation_lo[cc][k - 1]);
                offset += ep.delta[cc][k - 1];
            }
            ep.deviation_hi[i][k] = static_cast<double>(hi);
            ep.deviation_lo[i][k] = static_cast<double>(lo);
            ep.epsilon[i][k] = static_cast<double>(std::max(std::abs(hi), std::abs(lo)));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        ep.eps0_max = std::max(ep.eps0_max, ep.epsilon[i][0]);
    }

    // C_max with |delta^j_k| <= C_max c_sigma^k for all k.
    const double cs = pd.c_sigma;
    auto max_delta = [&](std::size_t k) {
        double x = 0;
        for (std::size_t j = 0; j < n; ++j) {
            x = std::max(x, std::abs(ep.delta[j][k]));
        }
        return x;
    };
    if (cs <= 1e-14) {
        // Only finitely many nonzero offsets: delta_k = 0 for k >= p.
        double sum = 0;
        for (int k = 0; k < p && static_cast<std::size_t>(k) < levels; ++k) {
            sum += max_delta(static_cast<std::size_t>(k));
        }
        ep.c_max = sum;
        ep.C = ep.c_max * ep.n_tiles;
        ep.theoretical_bound = ep.C + ep.eps0_max;
        return ep;
    }
    double c_max = 0;
    for (int k = 0; k < p && static_cast<std::size_t>(k) < levels; ++k) {
        c_max = std::max(c_max, max_delta(static_cast<std::size_t>(k)) / std::pow(cs, k));
    }
    // Spectral part: delta_p = sum_i alpha_i l_i over the non-Perron nonzero eigenvalues.
    bool spectral = false;
    {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> right(to_double(m).cast<std::complex<double>>());
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> left(to_double(m).transpose().cast<std::complex<double>>());
        if (right.info() == Eigen::Success && left.info() == Eigen::Success) {
            const double lam = pd.lambda.to_double();
            std::vector<double> dp(n);
            {
                // delta_p recomputed in long double from delta_0.
                std::vector<long double> d(n);
                for (std::size_t i = 0; i < n; ++i) {
                    d[i] = ep.delta[i][0];
                }
                for (int k = 0; k < p; ++k) {
                    std::vector<long double> next(n, 0);
                    for (std::size_t j = 0; j < n; ++j) {
                        for (std::size_t i = 0; i < n; ++i) {
                            next[j] += d[i] * static_cast<long double>(m[i][j].get_d());
                        }
                    }
                    d = next;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    dp[i] = static_cast<double>(d[i]);
                }
            }
            std::vector<double> cj(n, 0.0);
            spectral = true;
            std::vector<bool> used(n, false);
            for (Eigen::Index i = 0; i < right.eigenvalues().size() && spectral; ++i) {
                std::complex<double> mu = right.eigenvalues()(i);
                if (std::abs(mu) < 1e-9 || std::abs(mu - lam) < 1e-9 * lam) {
                    continue;
                }
                // Matching left eigenvector; eigenvalues must be simple.
                Eigen::Index match = -1;
                for (Eigen::Index k = 0; k < left.eigenvalues().size(); ++k) {
                    if (!used[static_cast<std::size_t>(k)] && std::abs(left.eigenvalues()(k) - mu) < 1e-7) {
                        if (match >= 0) {
                            spectral = false;
                        }
                        match = k;
                    }
                }
                if (match < 0 || !spectral) {
                    spectral = false;
                    break;
                }
                used[static_cast<std::size_t>(match)] = true;
                Eigen::VectorXcd r = right.eigenvectors().col(i);
                Eigen::VectorXcd l = left.eigenvectors().col(match);
                std::complex<double> lr = l.transpose() * r;
                if (std::abs(lr) < 1e-10) {
                    spectral = false;
                    break;
                }
                std::complex<double> alpha = 0;
                for (std::size_t k = 0; k < n; ++k) {
                    alpha += dp[k] * r(static_cast<Eigen::Index>(k));
                }
                alpha /= lr;
                for (std::size_t j = 0; j < n; ++j) {
                    cj[j] += std::abs(alpha) * std::abs(l(static_cast<Eigen::Index>(j))) / std::pow(cs, p);
                }
            }
            if (spectral) {
                for (double c : cj) {
                    // Small cushion for the float eigendecomposition.
                    c_max = std::max(c_max, c * (1 + 1e-9) + 1e-15);
                }
            }
        }
    }
    if (!spectral) {
        for (std::size_t k = 0; k < levels; ++k) {
            c_max = std::max(c_max, max_delta(k) / std::pow(cs, static_cast<double>(k)));
        }
    }
    ep.spectral_constant = spectral;
    ep.c_max = c_max;
    ep.C = ep.c_max * ep.n_tiles;
    ep.theoretical_bound = ep.C / (1.0 - cs) + ep.eps0_max;
    return ep;
}

} // namespace aperiodic
