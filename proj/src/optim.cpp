#include "nlgcl/optim.hpp"

#include "nlgcl/error.hpp"

#include <cmath>

namespace nlgcl {

namespace {

void update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v, const AdamState& opt, double bias1,
            double bias2) {
    m = opt.beta1 * m + (1.0 - opt.beta1) * grad;
    v = opt.beta2 * v + (1.0 - opt.beta2) * grad.cwiseProduct(grad);
    param.array() -= opt.lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + opt.eps);
}

}  // namespace

AdamState AdamState::for_state(const EmbeddingState& state, double lr) {
    AdamState opt;
    opt.m_user = Matrix::Zero(state.user0.rows(), state.user0.cols());
    opt.v_user = opt.m_user;
    opt.m_item = Matrix::Zero(state.item0.rows(), state.item0.cols());
    opt.v_item = opt.m_item;
    opt.lr = lr;
    return opt;
}

void adam_step(EmbeddingState& state, const GradBuffer& grads, AdamState& opt) {
    if (grads.g_user0.rows() != state.user0.rows() || grads.g_user0.cols() != state.user0.cols() ||
        grads.g_item0.rows() != state.item0.rows() || grads.g_item0.cols() != state.item0.cols() ||
        opt.m_user.rows() != state.user0.rows() || opt.m_item.rows() != state.item0.rows()) {
        throw DataError("adam_step: gradient/moment shapes do not match the embeddings");
    }
    if (!grads.g_user0.allFinite()) {
        throw NumericError("adam_step: non-finite gradient in user embedding block");
    }
    if (!grads.g_item0.allFinite()) {
        throw NumericError("adam_step: non-finite gradient in item embedding block");
    }
    ++opt.step_count;
    const auto t = static_cast<double>(opt.step_count);
    const double bias1 = 1.0 - std::pow(opt.beta1, t);
    const double bias2 = 1.0 - std::pow(opt.beta2, t);
    update(state.user0, grads.g_user0, opt.m_user, opt.v_user, opt, bias1, bias2);
    update(state.item0, grads.g_item0, opt.m_item, opt.v_item, opt, bias1, bias2);
}

}  // namespace nlgcl
