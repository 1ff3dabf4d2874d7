#ifndef EDMRAIM_QUAD_PRECISION_HPP
#define EDMRAIM_QUAD_PRECISION_HPP

// 113-bit floating point usable as an Eigen scalar. Boost's own Eigen bridge
// in 1.74 predates Eigen 3.4's infinity()/quiet_NaN() requirements, so the
// traits are spelled out here. Include before any Eigen decomposition header.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <Eigen/Core>

#include <limits>

namespace edm {
using Quad = boost::multiprecision::cpp_bin_float_quad;
} // namespace edm

namespace Eigen {

template <>
struct NumTraits<edm::Quad> : GenericNumTraits<edm::Quad> {
    using Real = edm::Quad;
    using NonInteger = edm::Quad;
    using Literal = edm::Quad;
    using Nested = edm::Quad;

    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 1,
        AddCost = 4,
        MulCost = 8
    };

    static Real epsilon() { return std::numeric_limits<Real>::epsilon(); }
    static Real dummy_precision() { return Real(1e-28); }
    static Real highest() { return (std::numeric_limits<Real>::max)(); }
    static Real lowest() { return std::numeric_limits<Real>::lowest(); }
    static Real infinity() { return std::numeric_limits<Real>::infinity(); }
    static Real quiet_NaN() { return std::numeric_limits<Real>::quiet_NaN(); }
    static int digits10() { return std::numeric_limits<Real>::digits10; }
    static int digits() { return std::numeric_limits<Real>::digits; }
};

} // namespace Eigen

#include <Eigen/Dense>

namespace edm {
using QuadMatrix = Eigen::Matrix<Quad, Eigen::Dynamic, Eigen::Dynamic>;
using QuadVector = Eigen::Matrix<Quad, Eigen::Dynamic, 1>;
} // namespace edm

#endif // EDMRAIM_QUAD_PRECISION_HPP
