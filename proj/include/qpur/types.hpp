#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace qpur {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

} // namespace qpur
