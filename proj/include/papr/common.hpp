#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace papr {

using cplx = std::complex<double>;
using ComplexSeries = std::vector<cplx>;
using RealSeries = std::vector<double>;
using Bits = std::vector<std::uint8_t>;

/// Thrown when an argument violates an operation's precondition.
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when a numerical result is undefined for the given data (e.g. PAPR of silence).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown for configuration entries that are recognised but deliberately unsupported.
class NotImplemented : public std::runtime_error {
public:
    explicit NotImplemented(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const char* message)
{
    if (!condition) {
        throw InvalidInput(message);
    }
}

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

constexpr unsigned log2_exact(std::size_t n) noexcept
{
    unsigned r = 0;
    while (n > 1) {
        n >>= 1;
        ++r;
    }
    return r;
}

inline double mean_power(std::span<const cplx> x) noexcept
{
    double acc = 0.0;
    for (const auto& v : x) {
        acc += std::norm(v);
    }
    return x.empty() ? 0.0 : acc / static_cast<double>(x.size());
}

inline RealSeries magnitudes(std::span<const cplx> x)
{
    RealSeries m(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        m[i] = std::abs(x[i]);
    }
    return m;
}

} // namespace papr
