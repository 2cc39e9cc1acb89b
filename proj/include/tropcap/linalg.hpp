#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>

#include "tropcap/errors.hpp"

namespace tropcap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline void require_dimension(Eigen::Index got, Eigen::Index expected, const char* what) {
    if (got != expected) {
        throw ContractViolation(std::string(what) + ": dimension mismatch (got " + std::to_string(got) +
                                ", expected " + std::to_string(expected) + ")");
    }
}

}  // namespace tropcap
