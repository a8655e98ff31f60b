#pragma once

#include <boost/rational.hpp>

#include <Eigen/Core>

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace symtrack {

/// Exact scalar used for golden-constant checks and exact-mode systems.
/// Small integer numerators/denominators throughout (structural constants
/// are +-1, inertia entries are user-supplied rationals), so int64 is ample.
using Rat = boost::rational<std::int64_t>;

inline double to_double(const Rat& q)
{
    return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator());
}

inline double to_double(double x) { return x; }

/// Parses "a/b" or "a" into an exact rational.
inline Rat parse_rational(std::string_view text)
{
    const auto parse_int = [](std::string_view s) -> std::int64_t {
        std::int64_t value = 0;
        auto first = s.data();
        auto last = s.data() + s.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last)
            throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
        return value;
    };

    const auto slash = text.find('/');
    if (slash == std::string_view::npos)
        return Rat(parse_int(text));
    const std::int64_t num = parse_int(text.substr(0, slash));
    const std::int64_t den = parse_int(text.substr(slash + 1));
    if (den == 0)
        throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    return Rat(num, den);
}

inline std::string to_string(const Rat& q)
{
    if (q.denominator() == 1)
        return std::to_string(q.numerator());
    return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

template <class T>
using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using MatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = VecT<double>;
using Mat = MatT<double>;

} // namespace symtrack

namespace Eigen {

/// Adapter so exact-rational vectors/matrices can live in Eigen containers.
/// Only coefficient-wise arithmetic is used on them; no decompositions.
template <>
struct NumTraits<symtrack::Rat> : GenericNumTraits<symtrack::Rat> {
    using Real = symtrack::Rat;
    using NonInteger = symtrack::Rat;
    using Nested = symtrack::Rat;
    using Literal = std::int64_t;

    static inline Real epsilon() { return Real(0); }
    static inline Real dummy_precision() { return Real(0); }
    static inline int digits10() { return 0; }

    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 2,
        AddCost = 8,
        MulCost = 8
    };
};

} // namespace Eigen
