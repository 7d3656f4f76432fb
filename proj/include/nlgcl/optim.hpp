#pragma once

#include "nlgcl/loss.hpp"
#include "nlgcl/model.hpp"

#include <cstdint>

namespace nlgcl {

struct AdamState {
    Matrix m_user;
    Matrix v_user;
    Matrix m_item;
    Matrix v_item;
    std::uint64_t step_count = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState for_state(const EmbeddingState& state, double lr = 1e-3);
};

/// One bias-corrected Adam update of both embedding matrices. Throws
/// NumericError naming the block if any gradient entry is not finite; in that
/// case neither the parameters nor the moments are modified.
void adam_step(EmbeddingState& state, const GradBuffer& grads, AdamState& opt);

}  // namespace nlgcl
