#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace sibandit {

struct RegretRow {
  std::int64_t t = 0; //!< 0-based time step
  int arm = 0;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
};

//! Per-epoch estimation diagnostics for one arm.
struct IndexDiagRow {
  int epoch = 0;
  int arm = 0;
  double index_error = 0.0; //!< ||vhat_k - v_k||_2 against the generator
  double objective = 0.0;
};

struct SmoothnessRecord {
  double beta_est = 0.0;
  double b_max = 0.0;
  int l1 = 0, l2 = 0, l3 = 0;
  std::int64_t n0 = 0;
};

//! Full-horizon record of one policy run.
struct RegretTrace {
  std::vector<RegretRow> rows;
  std::vector<IndexDiagRow> diag;
  std::optional<SmoothnessRecord> smoothness;

  double terminal_regret() const
  {
    return rows.empty() ? 0.0 : rows.back().cum_regret;
  }
};

} // namespace sibandit
