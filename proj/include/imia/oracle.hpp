#ifndef IMIA_ORACLE_HPP
#define IMIA_ORACLE_HPP

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "imia/net.hpp"
#include "imia/tensor.hpp"

namespace imia {

/// What the adversary may ask of the target model.
/// WhiteBox permits everything; Scores permits probability and label
/// queries; LabelOnly permits label queries alone.
enum class AccessLevel { WhiteBox, Scores, LabelOnly };

const char* to_string(AccessLevel level);
AccessLevel access_level_from_string(const std::string& name);
bool access_permits_scores(AccessLevel level);
bool access_permits_gradient(AccessLevel level);

struct OracleStats {
    uint64_t queries_scores = 0;
    uint64_t queries_label = 0;
    uint64_t queries_gradient = 0;
    uint64_t total() const { return queries_scores + queries_label + queries_gradient; }
};

/// Maximum total queries (all kinds combined); nullopt = unlimited.
struct QueryBudget {
    std::optional<uint64_t> max_queries;
};

/// Queryable target model behind an access level, with exact query
/// accounting (counters are atomic; queries themselves are read-only on the
/// model, so an oracle may be shared across attack workers).
class ModelOracle {
public:
    virtual ~ModelOracle() = default;

    AccessLevel access_level() const { return level_; }
    OracleStats stats() const;

    // softmax(forward(input)); AccessViolation at LabelOnly, BudgetExhausted
    // once the budget is spent.
    Tensor query_scores(const Tensor& input);

    // Hard label; permitted at every access level.
    int query_label(const Tensor& input);

    // Gradient of the cross-entropy loss w.r.t. the input; WhiteBox only.
    Tensor query_input_gradient(const Tensor& input, int label);

protected:
    ModelOracle(AccessLevel level, QueryBudget budget) : level_(level), budget_(budget) {}

    virtual Tensor do_scores(const Tensor& input) = 0;
    virtual int do_label(const Tensor& input) = 0;
    virtual Tensor do_input_gradient(const Tensor& input, int label) = 0;

private:
    void reserve_query();

    AccessLevel level_;
    QueryBudget budget_;
    std::atomic<uint64_t> n_scores_{0};
    std::atomic<uint64_t> n_label_{0};
    std::atomic<uint64_t> n_gradient_{0};
    std::atomic<uint64_t> n_reserved_{0};
};

/// In-process oracle over a trained network. The network must outlive the
/// oracle and is never mutated.
class LocalOracle final : public ModelOracle {
public:
    LocalOracle(const Network& net, AccessLevel level, QueryBudget budget = {});

protected:
    Tensor do_scores(const Tensor& input) override;
    int do_label(const Tensor& input) override;
    Tensor do_input_gradient(const Tensor& input, int label) override;

private:
    const Network* net_;
};

/// Per-attack budget view over a shared oracle: counts and limits its own
/// queries, delegates the work (and global counting) to the inner oracle.
class BudgetedOracle final : public ModelOracle {
public:
    BudgetedOracle(ModelOracle& inner, QueryBudget budget);

protected:
    Tensor do_scores(const Tensor& input) override;
    int do_label(const Tensor& input) override;
    Tensor do_input_gradient(const Tensor& input, int label) override;

private:
    ModelOracle* inner_;
};

} // namespace imia

#endif
