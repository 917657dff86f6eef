#include "qpur/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qpur/errors.hpp"

namespace qpur {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

void require(int D, double t, double gamma) {
    if (D < 2) throw InvalidDimension("dimension must be >= 2");
    if (!(t > 0.0)) throw InvalidArgument("time must be positive");
    if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
}

double J_of(int D) { return 0.5 * (D - 1); }

// a_k = -4 gamma t (s_k - V)^2 with s_k = J - k
void exponents(double V, double t, int D, double gamma, std::vector<double>& a) {
    const double J = J_of(D);
    a.resize(D);
    const double k4 = 4.0 * gamma * t;
    for (int k = 0; k < D; ++k) {
        const double d = (J - k) - V;
        a[k] = -k4 * d * d;
    }
}

double log_sum_exp(const std::vector<double>& x) {
    const double m = *std::max_element(x.begin(), x.end());
    double s = 0.0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}

// mass of a normal(mu, sd) in [a, b], using erfc on the far side
double normal_mass(double a, double b, double mu, double inv_sqrt2_sd) {
    const double za = (a - mu) * inv_sqrt2_sd;
    const double zb = (b - mu) * inv_sqrt2_sd;
    if (za >= 0.0) return 0.5 * (std::erfc(za) - std::erfc(zb));
    if (zb <= 0.0) return 0.5 * (std::erfc(-zb) - std::erfc(-za));
    return 0.5 * (std::erf(zb) - std::erf(za));
}

double integrate_checked(const std::function<double(double)>& f, double a, double b,
                         const QuadratureOptions& opt, const char* what) {
    double err = 0.0, l1 = 0.0;
    const double v = GK::integrate(f, a, b, opt.max_depth, opt.rel_tol, &err, &l1);
    if (!std::isfinite(v) || err > 1e3 * opt.rel_tol * std::max(l1, 1e-300) + 1e-300) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s: no convergence on [%.6g, %.6g], estimate %.6g, error %.3g",
                      what, a, b, v, err);
        throw QuadratureError(buf);
    }
    return v;
}

std::vector<double> midpoints(int D) {
    const double J = J_of(D);
    std::vector<double> r;
    for (int k = 0; k < D - 1; ++k) r.push_back(J - 0.5 - k);
    std::sort(r.begin(), r.end());
    return r;
}

double tail_cut(int D, double t, double gamma, const QuadratureOptions& opt) {
    return J_of(D) + opt.tail_sigmas / std::sqrt(4.0 * gamma * t);
}

// exp(-x^2 k) / cosh(k x) written without overflow, k = 4 gamma t
double sech_gauss(double x, double k) {
    const double y = std::abs(k * x);
    return 2.0 * std::exp(-k * x * x - y) / (1.0 + std::exp(-2.0 * y));
}

} // namespace

Vec unnormalized_state(double R, double t, int D, double gamma) {
    require(D, t, gamma);
    const double J = J_of(D);
    Vec out(D);
    for (int k = 0; k < D; ++k) {
        const double s = J - k;
        out(k) = std::exp(-4.0 * gamma * s * s * t + 2.0 * std::sqrt(2.0 * gamma) * s * R) / D;
    }
    return out;
}

double normalization(double R, double t, int D, double gamma) {
    return unnormalized_state(R, t, D, gamma).sum();
}

double normalization_symmetric(double R, double t, int D, double gamma) {
    require(D, t, gamma);
    const double J = J_of(D);
    std::vector<double> e;
    for (int k = 0; k < D; ++k) {
        const double s = -J + k;
        e.push_back(-4.0 * gamma * s * s * t + 2.0 * std::sqrt(2.0 * gamma) * s * R);
    }
    return std::exp(log_sum_exp(e)) / D;
}

double record_density_R(double R, double t, int D, double gamma) {
    require(D, t, gamma);
    const double J = J_of(D);
    double sum = 0.0;
    for (int k = 0; k < D; ++k) {
        const double d = R - 2.0 * std::sqrt(2.0 * gamma) * (J - k) * t;
        sum += std::exp(-d * d / (2.0 * t));
    }
    return sum / (D * std::sqrt(2.0 * kPi * t));
}

double record_density_V(double V, double t, int D, double gamma) {
    require(D, t, gamma);
    std::vector<double> a;
    exponents(V, t, D, gamma, a);
    double sum = 0.0;
    for (double v : a) sum += std::exp(v);
    return sum * std::sqrt(4.0 * gamma * t / kPi) / D;
}

double record_mass_V(double a, double b, double t, int D, double gamma) {
    require(D, t, gamma);
    if (b < a) std::swap(a, b);
    const double J = J_of(D);
    const double k = std::sqrt(4.0 * gamma * t);  // 1/(sqrt(2) sd)
    double m = 0.0;
    for (int i = 0; i < D; ++i) m += normal_mass(a, b, J - i, k);
    return m / D;
}

double impurity_kernel(double V, double t, int D, double gamma) {
    require(D, t, gamma);
    std::vector<double> a;
    exponents(V, t, D, gamma, a);
    const double amax = *std::max_element(a.begin(), a.end());
    double S = 0.0, P = 0.0;
    std::vector<double> e(D);
    for (int k = 0; k < D; ++k) {
        e[k] = std::exp(a[k] - amax);
        S += e[k];
    }
    for (int i = 0; i < D; ++i)
        for (int j = i + 1; j < D; ++j) P += e[i] * e[j];
    return 2.0 * P / (S * S);
}

double log10_impurity_kernel(double V, double t, int D, double gamma) {
    require(D, t, gamma);
    std::vector<double> a;
    exponents(V, t, D, gamma, a);
    std::vector<double> pairs;
    pairs.reserve(D * (D - 1) / 2);
    for (int i = 0; i < D; ++i)
        for (int j = i + 1; j < D; ++j) pairs.push_back(a[i] + a[j]);
    const double ln = std::log(2.0) + log_sum_exp(pairs) - 2.0 * log_sum_exp(a);
    return ln / std::log(10.0);
}

double mean_impurity(double t, int D, double gamma, const QuadratureOptions& opt) {
    require(D, t, gamma);
    auto f = [&](double V) { return impurity_kernel(V, t, D, gamma) * record_density_V(V, t, D, gamma); };
    const double cut = tail_cut(D, t, gamma, opt);
    std::vector<double> br{-cut};
    for (double r : midpoints(D)) br.push_back(r);
    br.push_back(cut);
    double sum = 0.0;
    for (size_t i = 0; i + 1 < br.size(); ++i) sum += integrate_checked(f, br[i], br[i + 1], opt, "mean_impurity");
    return sum;
}

double mean_log10_impurity(double t, int D, double gamma, const QuadratureOptions& opt) {
    require(D, t, gamma);
    auto f = [&](double V) {
        return log10_impurity_kernel(V, t, D, gamma) * record_density_V(V, t, D, gamma);
    };
    const double cut = tail_cut(D, t, gamma, opt);
    const double J = J_of(D);
    std::vector<double> br{-cut};
    for (int k = 0; k < 2 * D - 1; ++k) br.push_back(-J + 0.5 * k);
    br.push_back(cut);
    double sum = 0.0;
    for (size_t i = 0; i + 1 < br.size(); ++i)
        sum += integrate_checked(f, br[i], br[i + 1], opt, "mean_log10_impurity");
    return sum;
}

TwoEigResult mean_impurity_two_eig(double t, int D, double gamma) {
    require(D, t, gamma);
    const double k = 4.0 * gamma * t;
    auto g = [&](double x) { return sech_gauss(x, k); };
    QuadratureOptions opt;
    const double c = std::exp(-gamma * t) / D * std::sqrt(4.0 * gamma * t / kPi);
    const double inner = integrate_checked(g, -0.5, 0.0, opt, "two_eig") +
                         integrate_checked(g, 0.0, 0.5, opt, "two_eig");
    const double tail = integrate_checked(g, 0.5, std::numeric_limits<double>::infinity(), opt, "two_eig");
    TwoEigResult r;
    r.region_I = c * inner;
    r.region_II = c * (inner + tail);
    r.value = 2.0 * r.region_II + (D - 3) * r.region_I;
    r.long_time = 2.0 * (D - 1) / D * kPi * std::exp(-gamma * t) / std::sqrt(16.0 * gamma * t * kPi);
    return r;
}

double qbit_mean_impurity(double t, double gamma, bool long_time) {
    require(2, t, gamma);
    if (long_time) return kPi * std::exp(-gamma * t) / std::sqrt(16.0 * gamma * t * kPi);
    const double k = 4.0 * gamma * t;
    auto g = [&](double x) { return sech_gauss(x, k); };
    QuadratureOptions opt;
    const double half = integrate_checked(g, 0.0, 0.5, opt, "qbit") +
                        integrate_checked(g, 0.5, std::numeric_limits<double>::infinity(), opt, "qbit");
    return std::exp(-gamma * t) * std::sqrt(4.0 * gamma * t / kPi) * half;
}

BoundKind parse_bound_kind(const std::string& s) {
    if (s == "upper") return BoundKind::Upper;
    if (s == "pseudo-lower") return BoundKind::PseudoLower;
    if (s == "physical-likely") return BoundKind::PhysicalLikely;
    throw InvalidArgument("unknown bound kind: " + s);
}

const char* to_string(BoundKind k) {
    switch (k) {
    case BoundKind::Upper: return "upper";
    case BoundKind::PseudoLower: return "pseudo-lower";
    case BoundKind::PhysicalLikely: return "physical-likely";
    }
    return "?";
}

double trajectory_bound(BoundKind kind, double t, int D, double gamma) {
    require(D, t, gamma);
    const double J = J_of(D);
    switch (kind) {
    case BoundKind::Upper: {
        double best = 0.0;
        for (double r : midpoints(D)) best = std::max(best, impurity_kernel(r, t, D, gamma));
        return best;
    }
    case BoundKind::PseudoLower: {
        if (D < 3) throw InvalidDimension("pseudo-lower bound needs an inner peak (D >= 3)");
        double best = 1.0;
        for (int k = 1; k < D - 1; ++k) best = std::min(best, impurity_kernel(J - k, t, D, gamma));
        return best;
    }
    case BoundKind::PhysicalLikely:
        return impurity_kernel(J, t, D, gamma);
    }
    return 0.0;
}

double central_peak_fwhm(double t, int D, double gamma) {
    require(D, t, gamma);
    const double s0 = (D % 2 == 1) ? 0.0 : 0.5;
    const double half = 0.5 * record_density_V(s0, t, D, gamma);
    auto solve = [&](double inside, double outside) {
        if (record_density_V(outside, t, D, gamma) > half)
            throw InvalidArgument("central peak not resolved at this time");
        for (int it = 0; it < 200; ++it) {
            const double m = 0.5 * (inside + outside);
            (record_density_V(m, t, D, gamma) > half ? inside : outside) = m;
        }
        return 0.5 * (inside + outside);
    };
    return solve(s0, s0 + 0.5) - solve(s0, s0 - 0.5);
}

double ImpurityDistribution::total_mass() const {
    double m = 0.0;
    for (double d : density) m += d * bin_width;
    return m;
}

double ImpurityDistribution::mean() const {
    double m = 0.0, w = 0.0;
    for (size_t i = 0; i < ell.size(); ++i) {
        m += ell[i] * density[i];
        w += density[i];
    }
    return w > 0 ? m / w : 0.0;
}

double ImpurityDistribution::quantile(double q) const {
    const double total = total_mass();
    double acc = 0.0;
    for (size_t i = 0; i < ell.size(); ++i) {
        const double m = density[i] * bin_width / total;
        if (acc + m >= q && m > 0) {
            const double frac = (q - acc) / m;
            return ell[i] - 0.5 * bin_width + frac * bin_width;
        }
        acc += m;
    }
    return ell.empty() ? 0.0 : ell.back() + 0.5 * bin_width;
}

double qbit_log_impurity_density(double ell, double t, double gamma) {
    require(2, t, gamma);
    const double arg = 1.0 - 2.0 * std::pow(10.0, ell);
    if (arg <= 0.0) return 0.0;
    const double z = std::sqrt(arg);
    const double u = std::atanh(z);
    const double gt = gamma * t;
    return std::exp(-gt) * std::log(10.0) * std::cosh(u) * std::exp(-u * u / (4.0 * gt)) /
           (2.0 * std::sqrt(kPi * gt) * z);
}

namespace {

struct Cell {
    double x0, x1, mass;
};

ImpurityDistribution bin_cells(const std::vector<Cell>& cells, std::vector<DistributionRegion> regions,
                               int D, const DistributionGrid& grid) {
    double lo = grid.ell_min, hi = std::log10(1.0 - 1.0 / D);
    if (lo == 0.0) {
        lo = 0.0;
        for (const auto& c : cells) lo = std::min(lo, std::min(c.x0, c.x1));
    }
    for (const auto& c : cells) hi = std::max(hi, std::max(c.x0, c.x1));
    hi += 1e-9;
    ImpurityDistribution out;
    out.regions = std::move(regions);
    const int n = grid.bins;
    out.bin_width = (hi - lo) / n;
    out.ell.resize(n);
    out.density.assign(n, 0.0);
    for (int i = 0; i < n; ++i) out.ell[i] = lo + (i + 0.5) * out.bin_width;
    auto bin_of = [&](double x) {
        int b = static_cast<int>(std::floor((x - lo) / out.bin_width));
        return std::clamp(b, 0, n - 1);
    };
    for (const auto& c : cells) {
        if (c.mass <= 0.0) continue;
        double a = std::min(c.x0, c.x1), b = std::max(c.x0, c.x1);
        a = std::max(a, lo);
        if (b <= a) {
            out.density[bin_of(a)] += c.mass;
            continue;
        }
        const int ba = bin_of(a), bb = bin_of(b);
        for (int k = ba; k <= bb; ++k) {
            const double l = std::max(a, lo + k * out.bin_width);
            const double r = std::min(b, lo + (k + 1) * out.bin_width);
            if (r > l) out.density[k] += c.mass * (r - l) / (b - a);
        }
    }
    for (double& d : out.density) d /= out.bin_width;
    return out;
}

} // namespace

ImpurityDistribution log_impurity_distribution_regions(double t, int D, double gamma,
                                                       const DistributionGrid& grid) {
    require(D, t, gamma);
    QuadratureOptions opt;
    const double cut = tail_cut(D, t, gamma, opt);
    const double J = J_of(D);
    std::vector<double> br{-cut};
    for (int k = 0; k < 2 * D - 1; ++k) br.push_back(-J + 0.5 * k);
    br.push_back(cut);

    auto ell_of = [&](double V) { return log10_impurity_kernel(V, t, D, gamma); };
    std::vector<Cell> cells;
    std::vector<DistributionRegion> regions;
    const int n = std::max(grid.points_per_region, 2);
    for (size_t i = 0; i + 1 < br.size(); ++i) {
        const double a = br[i], b = br[i + 1];
        const double la = ell_of(a), lb = ell_of(b);
        const double dir = (lb > la) ? 1.0 : -1.0;
        // Lambda must be monotone on each region for the inversion
        double prev = la;
        for (int k = 1; k <= 64; ++k) {
            const double cur = ell_of(a + (b - a) * k / 64.0);
            if (dir * (cur - prev) < -1e-9) throw RefineGrid("log-impurity kernel not monotone on a region");
            prev = cur;
        }
        auto invert = [&](double target) {
            double x0 = a, x1 = b;
            for (int it = 0; it < 100; ++it) {
                const double m = 0.5 * (x0 + x1);
                if (dir * (ell_of(m) - target) < 0.0) x0 = m; else x1 = m;
                if (x1 - x0 < 1e-15 * std::max(1.0, std::abs(m))) break;
            }
            return 0.5 * (x0 + x1);
        };
        DistributionRegion reg{a, b, la, lb, 0.0};
        double vprev = a, lprev = la;
        for (int k = 1; k < n; ++k) {
            const double target = la + (lb - la) * k / (n - 1);
            const double v = (k == n - 1) ? b : invert(target);
            const double m = record_mass_V(vprev, v, t, D, gamma);
            cells.push_back({lprev, target, m});
            reg.mass += m;
            vprev = v;
            lprev = target;
        }
        regions.push_back(reg);
    }
    return bin_cells(cells, std::move(regions), D, grid);
}

ImpurityDistribution log_impurity_distribution(double t, int D, double gamma, const DistributionGrid& grid) {
    require(D, t, gamma);
    if (D > 2) return log_impurity_distribution_regions(t, D, gamma, grid);
    // D = 2: masses from the closed-form CDF, V(ell) = artanh(z) / (4 gamma t)
    const double k = 4.0 * gamma * t;
    const double top = std::log10(0.5);
    double lo = grid.ell_min;
    if (lo == 0.0) lo = log10_impurity_kernel(0.5 + 10.0 / std::sqrt(k), t, 2, gamma);
    std::vector<Cell> cells;
    const int n = std::max(grid.points_per_region, 2) * 2;
    auto v_of = [&](double ell) {
        const double arg = 1.0 - 2.0 * std::pow(10.0, ell);
        return arg <= 0.0 ? 0.0 : std::atanh(std::sqrt(arg)) / k;
    };
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
        const double l0 = lo + (top - lo) * i / n, l1 = lo + (top - lo) * (i + 1) / n;
        const double m = 2.0 * record_mass_V(v_of(l1), v_of(l0), t, 2, gamma);
        cells.push_back({l0, l1, m});
        mass += m;
    }
    std::vector<DistributionRegion> regions{{-v_of(lo), v_of(lo), lo, top, mass}};
    return bin_cells(cells, std::move(regions), D, grid);
}

double time_to_mean_impurity(double target, int D, double gamma) {
    if (D < 2) throw InvalidDimension("dimension must be >= 2");
    if (!(target > 0.0) || target >= 1.0 - 1.0 / D) throw InvalidArgument("target impurity out of range");
    double lo = 0.0, hi = 1.0;
    while (mean_impurity(hi, D, gamma) > target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e5) throw Unreachable("mean impurity does not reach the target");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double m = 0.5 * (lo + hi);
        (mean_impurity(m, D, gamma) > target ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

} // namespace qpur
