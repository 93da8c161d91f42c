#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "integrator.hpp"
#include "models.hpp"

namespace precess {

// Instantaneous precession rate (p*g1 + q*g2)/(g1^2 + g2^2). Within eps of the
// poles g3 = +-1 the quotient is 0/0; for the Goryachev-Chaplygin flow the limit
// along the flow direction exists and equals (2p + sgn(g3)*k)/(8(p^2+q^2)) with k
// the cubic invariant at s. Other models have no defined limit there.
double psi_rate(const Model& m, const State6& s, double eps = 1e-9);

// Streaming cumulative Simpson quadrature of the rate on a uniform grid, with a
// guard that any per-sample increment stays below pi/2 (larger means the grid
// aliases the rotation and the unwrapped angle is untrustworthy).
class PsiAccumulator {
  public:
    PsiAccumulator(double dt, bool guard = true) : dt_(dt), guard_(guard) {}

    // Feed f_i = psi_rate at grid index i (i = 0,1,2,...). Returns the newly
    // finalized psi values (index, value); the startup sample lags one feed.
    void feed(double f, const std::function<void(int64_t idx, double psi)>& emit);
    double current() const { return psi_last_; }

  private:
    double dt_;
    bool guard_;
    int64_t n_ = 0;
    double f0_ = 0, f1_ = 0, f2_ = 0; // last three rates
    double psi_prev2_ = 0, psi_prev_ = 0, psi_last_ = 0;
    void push_value(int64_t idx, double v, const std::function<void(int64_t, double)>& emit);
};

// Fills traj.psi (psi(0) = 0) by quadrature of psi_rate along the samples.
void accumulate_psi(const Model& m, Trajectory& traj);

struct LambdaEstimate {
    double lambda = 0.0;
    double psi0 = 0.0;
    double horizon = 0.0;
    double rel_change = 0.0; // |L(T)-L(2T)|/|L(T)|, or the absolute change on the floor path
    bool has_rel_change = false;
    bool converged = false;
    double residual_sup = 0.0;
};

// Ordinary least squares line through (t, psi); needs >= 100 samples.
LambdaEstimate estimate_lambda(const std::vector<double>& times, const std::vector<double>& psi);
LambdaEstimate estimate_lambda(const Trajectory& traj);

struct LambdaOpts {
    double t0 = 500.0;
    double threshold = 0.0005;
    double abs_floor = 1e-6; // relative test is undefined near lambda = 0
    int max_doublings = 10;
};

// Doubles the horizon T0, 2*T0, ... integrating incrementally until
// |L(T) - L(2T)|/|L(T)| < threshold (absolute change < abs_floor when |L(T)|
// is below the floor), or the doubling cap is hit (converged=false then).
LambdaEstimate lambda_converged(const Model& m, const State6& s0, const LambdaOpts& opts = {},
                                const IntegratorConfig& cfg = {});

// {lambda, psi0, horizon, rel_change, converged, residual_sup}; rel_change is
// null when no doubling comparison happened.
std::string lambda_json(const LambdaEstimate& est);

} // namespace precess
