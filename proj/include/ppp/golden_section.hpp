#ifndef PPP_GOLDEN_SECTION_HPP
#define PPP_GOLDEN_SECTION_HPP

#include <cmath>
#include <stdexcept>
#include <utility>

namespace ppp {

struct Bracket {
    double lower;
    double upper;
};

struct Extremum {
    double argument;
    double value;
};

/// Thrown when bracket expansion runs past its cap without the objective turning down.
class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Bracket the maximizer of a concave function on [origin, cap].
 *
 * Starts from [origin, origin + width] and doubles the right end until the
 * objective decreases. Concavity guarantees the maximizer lies between the
 * point two steps back and the current right end.
 */
template <typename F>
Bracket expand_maximum_bracket(F&& f, double origin, double width, double cap) {
    double behind = origin;
    double mid = origin;
    double f_mid = f(origin);
    double right = origin + width;
    while (right <= cap) {
        const double f_right = f(right);
        if (!std::isfinite(f_right)) {
            throw BracketError("objective not finite during bracket expansion");
        }
        if (f_right < f_mid) {
            return {behind, right};
        }
        behind = mid;
        mid = right;
        f_mid = f_right;
        right = origin + 2.0 * (right - origin);
    }
    throw BracketError("no maximizer found below the bracket cap");
}

/// Golden-section maximization on a bracket, refined until its width is below `tolerance`.
template <typename F>
Extremum golden_section_maximize(F&& f, Bracket bracket, double tolerance) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = bracket.lower;
    double b = bracket.upper;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tolerance) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

}  // namespace ppp

#endif  // PPP_GOLDEN_SECTION_HPP
