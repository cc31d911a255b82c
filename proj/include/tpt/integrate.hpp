#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "tpt/committor_eval.hpp"
#include "tpt/models.hpp"
#include "tpt/rng.hpp"
#include "tpt/util.hpp"

namespace tpt {

using ExtraDrift = std::function<void(CVecRef, Vec&)>;

// An additive term U(x) in the potential; Metropolis steps target
// exp(-beta (V + U)) and the drift picks up -grad U.
struct ExtraPotential {
  std::function<double(CVecRef)> value;
  std::function<void(CVecRef, Vec&)> grad;
};

// Drift correction sigma sigma^T grad log max(q, eps_q), norm-capped.
struct Controller {
  const CommittorFn* committor = nullptr;
  double eps_q = 1e-12;
  double c_max = 1e6;

  void drift(const DynamicsModel& m, CVecRef x, Vec& out) const;
  // -2 beta^{-1} log max(q, eps_q); the potential whose gradient flow equals
  // the controlled drift for overdamped models
  ExtraPotential tilt(const DynamicsModel& m) const;
  ExtraDrift as_extra_drift(const DynamicsModel& m) const;
};

// One Euler-Maruyama step x' = x + [b + extra] dt + sigma(x) sqrt(dt) noise.
Vec em_step(const DynamicsModel& m, const ExtraDrift& extra, CVecRef state, double dt,
            CVecRef noise);

// Metropolis-adjusted step targeting exp(-beta (V + U)); requires an
// overdamped model with isotropic diffusion. Returns the new state and the
// acceptance flag; a non-finite proposal is rejected.
std::pair<Vec, bool> mala_step(const DynamicsModel& m, const ExtraPotential* extra, CVecRef state,
                               double dt, Rng& rng);

enum class StopCause { EnteredA, EnteredB, MaxSteps };

struct TrajectoryRecord {
  double dt = 0;
  std::vector<Vec> states;  // thinned; includes the initial and final states
  std::vector<long> state_steps;
  StopCause cause = StopCause::MaxSteps;
  long steps = 0;
  std::uint64_t seed = 0;
  double crossover_time() const { return steps * dt; }
};

struct SimulateOptions {
  double dt = 1e-5;
  long max_steps = 100000000;
  long thinning = 0;  // 0: store only endpoints
  bool use_mala = false;
};

// Steps until the state first enters the closure of region A or B.
TrajectoryRecord simulate_until(const DynamicsModel& m, const Controller* controller, CVecRef start,
                                const Region& a, const Region& b, const SimulateOptions& opt,
                                Rng& rng);

void write_trajectory_csv(const std::string& path, const TrajectoryRecord& t, int dim);

}  // namespace tpt
