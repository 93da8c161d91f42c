#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "models.hpp"

namespace precess {

struct IntegratorConfig {
    double rel_tol = 1e-12;
    double abs_tol = 1e-12;
    double max_step = 0.1;
    double sample_dt = 0.01;
    bool renormalize_gamma = false;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<State6> states;
    std::vector<double> psi;            // empty until the precession pass fills it
    std::vector<double> integral_drift; // per integral, (h, c, k, geom) order

    size_t size() const { return times.size(); }
    bool has_psi() const { return psi.size() == times.size() && !psi.empty(); }
};

// Adaptive embedded Runge-Kutta 8(5,3) with a 7th-order dense interpolant,
// advanced in pieces so horizon-doubling continues from the exact internal
// state.
class FlowSampler {
  public:
    FlowSampler(const Model& m, const State6& s0, const IntegratorConfig& cfg);

    // Integrates from the current time to t_target, invoking on_sample at every
    // output-grid time k*sample_dt in (t_current, t_target]. Throws on step
    // underflow with the failure time in the message.
    void advance_to(double t_target,
                    const std::function<void(int64_t k, double t, const State6& y)>& on_sample);

    double time() const { return t_; }
    const State6& state() const { return y_; }

  private:
    void step_once(double h_try, bool& accepted, double& h_next, double& h_used);
    void dense_prepare();
    State6 dense_eval(double theta) const;

    Model m_;
    IntegratorConfig cfg_;
    State6 y_;
    double t_;
    double h_;
    double hlast_ = 0.0;
    int64_t next_k_;
    State6 k_[16]; // stage derivatives; k_[0] carries over as FSAL
    State6 y_new_;
    State6 rc_[7]; // dense-output polynomial pieces
};

Trajectory integrate(const Model& m, const State6& s0, double t_end,
                     const IntegratorConfig& cfg = {});

// max |I_j(t) - I_j(0)| / max(1, |I_j(0)|) over the samples, (h, c, k, geom) order.
std::vector<double> invariant_drift(const Model& m, const Trajectory& traj);

std::string trajectory_csv(const Trajectory& traj);

} // namespace precess
