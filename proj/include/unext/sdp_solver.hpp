#pragma once

#include <string>
#include <vector>

#include <unext/sdp_problem.hpp>

// Primal-dual interior-point solver for the embedded real form.
//
// The backend is an infeasible-start Mehrotra predictor-corrector method with
// Nesterov-Todd scaling.  Cone feasibility of the affine slacks is maintained
// throughout (the caller supplies a strictly interior starting point);
// equality residuals are driven to zero along the way.  The reduced KKT
// system is solved by block elimination over variable groups, with an
// analytic inverse for groups whose only cone appearance is their own PSD
// constraint.

namespace unext::sdp {

enum class SolveStatus { optimal, infeasible, unbounded, inaccurate, failed };

std::string to_string(SolveStatus s);

struct SolveReport {
    SolveStatus status = SolveStatus::failed;
    double objective_value = 0.0;
    double primal_residual = 0.0;  // max-norm of equality violation
    double dual_residual = 0.0;    // max-norm of stationarity violation
    double duality_gap = 0.0;      // total cone inner product at exit
    int iterations = 0;
    double wall_time_ms = 0.0;
};

struct SolverOptions {
    double tol = 1e-8;
    int max_iter = 100;
    bool verbose = false;
};

struct Solution {
    RVec z;
    RVec lambda;
    std::vector<Mat> var_values;  // per declared variable
};

class SolverBackend {
  public:
    virtual ~SolverBackend() = default;
    // z0 must make every PSD block strictly positive definite.
    virtual SolveReport solve(const RealConicProblem& p, const RVec& z0,
                              const SolverOptions& opts, Solution* out) const = 0;
};

class InteriorPointBackend final : public SolverBackend {
  public:
    SolveReport solve(const RealConicProblem& p, const RVec& z0,
                      const SolverOptions& opts, Solution* out) const override;
};

// Embeds and solves with the bundled backend.
SolveReport solve_conic(const ConicProblem& p, const RVec& z0,
                        const SolverOptions& opts, Solution* out);

}  // namespace unext::sdp
