#pragma once

// Equal-total-power bookkeeping between active and passive surfaces.

#include <sstream>
#include <stdexcept>

namespace arisnoma {

enum class Mode { aris, pris };

inline const char* to_string(Mode m) { return m == Mode::aris ? "aris" : "pris"; }

struct PowerBudget
{
    double p_tot = 0;
    double p_ris = 0;  // amplifier budget; ignored in PRIS mode
    double p_ps = 0;   // per-element phase shifter
    double p_dc = 0;   // per-amplifier DC bias
    Mode mode = Mode::aris;
};

class InfeasibleBudget : public std::runtime_error
{
public:
    InfeasibleBudget(const std::string& what, double shortfall)
        : std::runtime_error(what), shortfall_(shortfall)
    {
    }
    /// Watts missing for the BS to get any power at all.
    double shortfall() const { return shortfall_; }

private:
    double shortfall_;
};

/// BS transmit power left after the surface's consumption.
///   ARIS: p_tot - p_ris - Q (p_ps + p_dc)     PRIS: p_tot - M p_ps
inline double solve_bs_power(const PowerBudget& b, int M, int P, int Q)
{
    if (M != P * Q || Q < 1 || P < 1)
        throw std::invalid_argument("solve_bs_power: M must equal P*Q");
    const double p_bs = b.mode == Mode::aris ? b.p_tot - b.p_ris - Q * (b.p_ps + b.p_dc)
                                             : b.p_tot - M * b.p_ps;
    if (!(p_bs > 0.0))
    {
        std::ostringstream msg;
        msg << "infeasible " << to_string(b.mode) << " budget: p_tot = " << b.p_tot
            << " W leaves " << p_bs << " W for the BS (shortfall " << -p_bs << " W)";
        throw InfeasibleBudget(msg.str(), -p_bs);
    }
    return p_bs;
}

}  // namespace arisnoma
