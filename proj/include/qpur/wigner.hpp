#pragma once

#include <vector>

#include "qpur/types.hpp"

namespace qpur {

// Condon-Shortley <j1 m1; j2 m2 | J M>. Arguments must be integers or
// half-integers; selection-rule violations give 0.
double clebsch_gordan(double j1, double m1, double j2, double m2, double J, double M);

inline int multipole_index(int k, int q) { return k * k + k + q; }

// T_kq = sum_{m m'} (-1)^{J-m'} <J m; J -m' | k q> |J m><J m'|, orthonormal
// under the trace inner product. Index with multipole_index(k, q).
const std::vector<Mat>& multipole_operators(int D);

struct MultipoleDecomposition {
    int D = 0;
    std::vector<cplx> coeff;  // rho_kq = tr(rho T_kq^dagger)
    int kmax() const { return D - 1; }
    cplx at(int k, int q) const { return coeff[multipole_index(k, q)]; }
};
MultipoleDecomposition multipoles(const Mat& rho);

// W = c_W sum rho_kq Y_kq with c_W = sqrt(D/(4 pi)), so that the surface
// integral of W is 1 and the maximally mixed state gives 1/(4 pi).
double wigner_normalization(int D);
double wigner_at(const MultipoleDecomposition& m, double theta, double phi);

struct WignerGrid {
    int D = 0;
    std::vector<double> phi;  // cell centres on [-pi, pi)
    std::vector<double> z;    // J cos(theta) at cell centres
    RMat values;              // values(i_z, i_phi)
    double convention = 0.0;  // c_W
    double max_imag = 0.0;    // largest imaginary residual seen
    double cell_area() const; // solid angle per cell
    double integral() const;
};
WignerGrid wigner_grid(const Mat& rho, int resolution);

// c_D * integral W_rho W_sigma, c_D fixed from the maximally mixed state.
double overlap_from_wigner(const Mat& rho, const Mat& sigma, int resolution);

// |phi_r> = D^{-1/2} sum_m exp(-i m phi_r) |J, m>, phi_r = 2 pi (J - r) / D.
CVec phase_state(int D, int r);
double phase_angle(int D, int r);  // phi_r wrapped to [-pi, pi)
// Azimuth of the grid maximum.
double peak_phi(const WignerGrid& g);

} // namespace qpur
