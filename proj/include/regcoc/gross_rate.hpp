#pragma once

#include "regcoc/error.hpp"

#include <cmath>
#include <compare>
#include <string>

namespace regcoc {

// Gross cost of capital R = 1 + r. Stored gross; net() and percent() are
// display forms only.
class GrossRate {
public:
    constexpr GrossRate() = default;

    explicit GrossRate(double gross) : gross_(gross)
    {
        if (!std::isfinite(gross)) {
            throw OutOfRange("gross rate must be finite");
        }
    }

    static GrossRate from_net(double net) { return GrossRate(1.0 + net); }
    static GrossRate from_percent(double pct) { return GrossRate(1.0 + pct / 100.0); }

    double gross() const noexcept { return gross_; }
    double net() const noexcept { return gross_ - 1.0; }
    double percent() const noexcept { return 100.0 * (gross_ - 1.0); }

    // Discount factor 1/R.
    double discount() const noexcept { return 1.0 / gross_; }

    friend auto operator<=>(const GrossRate&, const GrossRate&) = default;

private:
    double gross_ = 1.0;
};

inline GrossRate operator*(GrossRate a, GrossRate b) { return GrossRate(a.gross() * b.gross()); }
inline GrossRate operator/(GrossRate a, GrossRate b) { return GrossRate(a.gross() / b.gross()); }

} // namespace regcoc
