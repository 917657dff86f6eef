#include "qpur/wigner.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <boost/math/special_functions/spherical_harmonic.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "qpur/errors.hpp"
#include "qpur/qcore.hpp"

namespace qpur {

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

int twice(double j) {
    const double t = 2.0 * j;
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-9) throw InvalidArgument("angular momentum must be integer or half-integer");
    return static_cast<int>(r);
}

cpp_int factorial(int n) {
    static std::vector<cpp_int> cache{1};
    static std::mutex mu;
    std::lock_guard<std::mutex> lk(mu);
    while (static_cast<int>(cache.size()) <= n) cache.push_back(cache.back() * cache.size());
    return cache[n];
}

} // namespace

double clebsch_gordan(double j1, double m1, double j2, double m2, double J, double M) {
    const int a = twice(j1), am = twice(m1), b = twice(j2), bm = twice(m2), c = twice(J), cm = twice(M);
    if (a < 0 || b < 0 || c < 0) return 0.0;
    if ((a + am) % 2 || (b + bm) % 2 || (c + cm) % 2) throw InvalidArgument("j and m must share parity");
    if (am + bm != cm) return 0.0;
    if (std::abs(am) > a || std::abs(bm) > b || std::abs(cm) > c) return 0.0;
    if (c > a + b || c < std::abs(a - b) || (a + b + c) % 2) return 0.0;

    // Racah's closed form, all integer arguments written as halves
    auto f = [](int twice_n) { return factorial(twice_n / 2); };
    cpp_rational pre(cpp_int(c + 1) * f(c + a - b) * f(c - a + b) * f(a + b - c), f(a + b + c + 2));
    pre *= cpp_rational(f(c + cm) * f(c - cm) * f(a - am) * f(a + am) * f(b - bm) * f(b + bm));
    cpp_rational sum = 0;
    for (int k = 0;; ++k) {
        const int t[6] = {2 * k, a + b - c - 2 * k, a - am - 2 * k, b + bm - 2 * k,
                          c - b + am + 2 * k, c - a - bm + 2 * k};
        if (t[1] < 0 || t[2] < 0 || t[3] < 0) break;
        if (t[4] < 0 || t[5] < 0) continue;
        cpp_int den = 1;
        for (int v : t) den *= f(v);
        sum += cpp_rational((k % 2) ? -1 : 1, den);
    }
    if (sum == 0) return 0.0;
    const double mag = std::sqrt(static_cast<double>(cpp_rational(pre * sum * sum)));
    return sum > 0 ? mag : -mag;
}

const std::vector<Mat>& multipole_operators(int D) {
    static std::map<int, std::unique_ptr<std::vector<Mat>>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(D);
    if (it != cache.end()) return *it->second;
    if (D < 2) throw InvalidDimension("dimension must be >= 2");
    const double J = 0.5 * (D - 1);
    auto ops = std::make_unique<std::vector<Mat>>(D * D, Mat::Zero(D, D));
    for (int k = 0; k < D; ++k)
        for (int q = -k; q <= k; ++q) {
            Mat& T = (*ops)[multipole_index(k, q)];
            for (int i = 0; i < D; ++i)
                for (int j = 0; j < D; ++j) {
                    const double m = J - i, mp = J - j;
                    if (std::abs(m - mp - q) > 1e-9) continue;
                    const int sgn = (static_cast<int>(std::lround(J - mp)) % 2) ? -1 : 1;
                    T(i, j) = sgn * clebsch_gordan(J, m, J, -mp, k, q);
                }
        }
    auto& ref = *ops;
    cache.emplace(D, std::move(ops));
    return ref;
}

MultipoleDecomposition multipoles(const Mat& rho) {
    const int D = static_cast<int>(rho.rows());
    const auto& T = multipole_operators(D);
    MultipoleDecomposition out;
    out.D = D;
    out.coeff.resize(D * D);
    for (int idx = 0; idx < D * D; ++idx) out.coeff[idx] = (rho * T[idx].adjoint()).trace();
    return out;
}

double wigner_normalization(int D) { return std::sqrt(D / (4.0 * kPi)); }

double wigner_at(const MultipoleDecomposition& m, double theta, double phi) {
    cplx w = 0.0;
    for (int k = 0; k < m.D; ++k)
        for (int q = -k; q <= k; ++q)
            w += m.at(k, q) * boost::math::spherical_harmonic(k, q, theta, phi);
    return wigner_normalization(m.D) * w.real();
}

double WignerGrid::cell_area() const {
    return (2.0 * kPi / phi.size()) * (2.0 / z.size());
}

double WignerGrid::integral() const { return values.sum() * cell_area(); }

WignerGrid wigner_grid(const Mat& rho, int resolution) {
    if (resolution < 32) throw InvalidArgument("Wigner grid resolution must be >= 32");
    const MultipoleDecomposition m = multipoles(rho);
    const int D = m.D, N = resolution;
    const double J = 0.5 * (D - 1);
    WignerGrid g;
    g.D = D;
    g.convention = wigner_normalization(D);
    for (int i = 0; i < N; ++i) g.phi.push_back(-kPi + (i + 0.5) * 2.0 * kPi / N);
    std::vector<double> cth(N);
    for (int j = 0; j < N; ++j) {
        cth[j] = -1.0 + (j + 0.5) * 2.0 / N;
        g.z.push_back(J * cth[j]);
    }
    // W(theta, phi) = c sum_q e^{iq phi} A_q(theta)
    const int K = D - 1;
    Mat A = Mat::Zero(N, 2 * K + 1);
    for (int j = 0; j < N; ++j) {
        const double th = std::acos(cth[j]);
        for (int k = 0; k <= K; ++k)
            for (int q = -k; q <= k; ++q)
                A(j, q + K) += m.at(k, q) * boost::math::spherical_harmonic(k, q, th, 0.0);
    }
    Mat E(2 * K + 1, N);
    for (int q = -K; q <= K; ++q)
        for (int i = 0; i < N; ++i) E(q + K, i) = std::polar(1.0, q * g.phi[i]);
    const Mat W = g.convention * (A * E);
    g.values = W.real();
    g.max_imag = W.imag().cwiseAbs().maxCoeff();
    return g;
}

double overlap_from_wigner(const Mat& rho, const Mat& sigma, int resolution) {
    if (rho.rows() != sigma.rows()) throw DimensionMismatch("overlap_from_wigner: dimensions differ");
    const int D = static_cast<int>(rho.rows());
    const WignerGrid mix = wigner_grid(maximally_mixed(D), resolution);
    const double cD = (1.0 / D) / (mix.values.array().square().sum() * mix.cell_area());
    const WignerGrid a = wigner_grid(rho, resolution);
    const WignerGrid b = wigner_grid(sigma, resolution);
    return cD * (a.values.array() * b.values.array()).sum() * a.cell_area();
}

double phase_angle(int D, int r) {
    const double J = 0.5 * (D - 1);
    double p = 2.0 * kPi * (J - r) / D;
    p = std::fmod(p + kPi, 2.0 * kPi);
    if (p < 0) p += 2.0 * kPi;
    return p - kPi;
}

CVec phase_state(int D, int r) {
    if (D < 2) throw InvalidDimension("dimension must be >= 2");
    const double J = 0.5 * (D - 1);
    const double ph = 2.0 * kPi * (J - r) / D;
    CVec v(D);
    for (int i = 0; i < D; ++i) v(i) = std::polar(1.0 / std::sqrt(static_cast<double>(D)), -(J - i) * ph);
    return v;
}

double peak_phi(const WignerGrid& g) {
    Eigen::Index r, c;
    g.values.maxCoeff(&r, &c);
    return g.phi[c];
}

} // namespace qpur
