#include "accord/selection/candidate.hpp"

#include <algorithm>
#include <cmath>

namespace accord::selection {

CandidateResult select_candidates(const CostMatrix& matrix, const AgentId& self,
                                  const CostParams& params, int batch) {
    CandidateResult out;
    std::size_t self_row = matrix.rows.size();
    for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
        if (matrix.rows[r] == self) {
            self_row = r;
            break;
        }
    }

    for (std::size_t c = 0; c < matrix.cols.size(); ++c) {
        double best = kInfeasibleCost;
        for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
            best = std::min(best, matrix.at(r, c));
        }
        if (std::isinf(best)) {
            out.infeasible_jobs.push_back(matrix.cols[c]);
            continue;
        }
        if (self_row == matrix.rows.size()) continue;
        double own = matrix.at(self_row, c);
        if (std::isinf(own)) continue;
        if (own <= (1.0 + params.theta) * best) {
            out.selected.push_back(Candidate{self, matrix.cols[c], own});
        }
    }

    std::sort(out.selected.begin(), out.selected.end(),
              [](const Candidate& a, const Candidate& b) {
                  if (a.cost != b.cost) return a.cost < b.cost;
                  return a.job < b.job;
              });
    if (batch >= 0 && out.selected.size() > static_cast<std::size_t>(batch)) {
        out.selected.resize(static_cast<std::size_t>(batch));
    }
    return out;
}

}  // namespace accord::selection
