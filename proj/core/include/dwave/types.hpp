#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace dwave {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using CSpMat = Eigen::SparseMatrix<std::complex<double>>;
using Triplet = Eigen::Triplet<double>;

}  // namespace dwave
