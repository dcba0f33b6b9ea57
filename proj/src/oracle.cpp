#include "imia/oracle.hpp"

#include "imia/errors.hpp"

namespace imia {

const char* to_string(AccessLevel level) {
    switch (level) {
    case AccessLevel::WhiteBox: return "white-box";
    case AccessLevel::Scores: return "scores";
    case AccessLevel::LabelOnly: return "label-only";
    }
    return "?";
}

AccessLevel access_level_from_string(const std::string& name) {
    if (name == "white-box" || name == "whitebox") return AccessLevel::WhiteBox;
    if (name == "scores") return AccessLevel::Scores;
    if (name == "label-only" || name == "labelonly") return AccessLevel::LabelOnly;
    throw std::invalid_argument("unknown access level '" + name + "'");
}

bool access_permits_scores(AccessLevel level) { return level != AccessLevel::LabelOnly; }

bool access_permits_gradient(AccessLevel level) { return level == AccessLevel::WhiteBox; }

OracleStats ModelOracle::stats() const {
    OracleStats s;
    s.queries_scores = n_scores_.load();
    s.queries_label = n_label_.load();
    s.queries_gradient = n_gradient_.load();
    return s;
}

void ModelOracle::reserve_query() {
    if (!budget_.max_queries) return;
    uint64_t cur = n_reserved_.load();
    do {
        if (cur >= *budget_.max_queries) {
            throw BudgetExhausted("query budget of " + std::to_string(*budget_.max_queries) +
                                  " exhausted");
        }
    } while (!n_reserved_.compare_exchange_weak(cur, cur + 1));
}

Tensor ModelOracle::query_scores(const Tensor& input) {
    if (!access_permits_scores(level_)) {
        throw AccessViolation("scores not permitted at level " +
                              std::string(to_string(level_)));
    }
    reserve_query();
    Tensor probs = do_scores(input);
    n_scores_.fetch_add(1, std::memory_order_relaxed);
    return probs;
}

int ModelOracle::query_label(const Tensor& input) {
    reserve_query();
    const int label = do_label(input);
    n_label_.fetch_add(1, std::memory_order_relaxed);
    return label;
}

Tensor ModelOracle::query_input_gradient(const Tensor& input, int label) {
    if (!access_permits_gradient(level_)) {
        throw AccessViolation("gradients not permitted at level " +
                              std::string(to_string(level_)));
    }
    reserve_query();
    Tensor grad = do_input_gradient(input, label);
    n_gradient_.fetch_add(1, std::memory_order_relaxed);
    return grad;
}

LocalOracle::LocalOracle(const Network& net, AccessLevel level, QueryBudget budget)
    : ModelOracle(level, budget), net_(&net) {}

Tensor LocalOracle::do_scores(const Tensor& input) { return softmax(net_->forward(input)); }

int LocalOracle::do_label(const Tensor& input) { return net_->predict_label(input); }

Tensor LocalOracle::do_input_gradient(const Tensor& input, int label) {
    return net_->input_gradient(input, label);
}

BudgetedOracle::BudgetedOracle(ModelOracle& inner, QueryBudget budget)
    : ModelOracle(inner.access_level(), budget), inner_(&inner) {}

Tensor BudgetedOracle::do_scores(const Tensor& input) { return inner_->query_scores(input); }

int BudgetedOracle::do_label(const Tensor& input) { return inner_->query_label(input); }

Tensor BudgetedOracle::do_input_gradient(const Tensor& input, int label) {
    return inner_->query_input_gradient(input, label);
}

} // namespace imia
