#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sqlink/dataset.hpp"
#include "sqlink/pipeline.hpp"
#include "sqlink/schema_linking.hpp"

namespace sqlink {

struct DifficultyBucket {
    int correct = 0;
    int total = 0;
    double percentage() const { return total == 0 ? 0.0 : 100.0 * correct / total; }
};

/// Execution accuracy, overall and per difficulty. Questions whose gold SQL
/// fails to execute are excluded and counted.
struct ExBreakdown {
    std::map<std::string, DifficultyBucket> buckets;  // keys: simple/moderate/challenging/unlabeled
    int correct = 0;
    int n_evaluated = 0;
    int n_excluded = 0;
    std::vector<std::string> excluded_ids;
    double total_percentage() const { return n_evaluated == 0 ? 0.0 : 100.0 * correct / n_evaluated; }
};

struct EvalOptions {
    std::chrono::milliseconds exec_timeout{30000};
    long long exec_max_rows = 10000;
    int workers = 1;
};

ExBreakdown evaluate_ex(const std::map<std::string, std::string>& predictions, const Dataset& dataset,
                        const EvalOptions& options = {});

struct VesOptions {
    int timing_runs = 5;  // odd; median damps scheduler noise
    std::chrono::milliseconds exec_timeout{30000};
    long long exec_max_rows = 10000;
};

/// Valid efficiency score per the public BIRD definition: matching questions
/// contribute sqrt(gold_time / pred_time), others 0; scaled to percent.
double evaluate_ves(const std::map<std::string, std::string>& predictions, const Dataset& dataset,
                    const VesOptions& options = {});

struct PriceTable {
    double input_per_million = 0.0;   // USD per 1M prompt tokens
    double output_per_million = 0.0;  // USD per 1M completion tokens
};

struct CostReport {
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
    double input_millions = 0.0;
    double output_millions = 0.0;
    double cost_usd = 0.0;
    int n_traces = 0;
};

CostReport cost_report(const std::vector<PipelineTrace>& traces, const PriceTable& prices);

/// Table-shaped rendering: Input(M) / Output(M) / Cost($).
std::string format_cost_report(const CostReport& report);

struct EvalReport {
    ExBreakdown ex;
    std::optional<double> ves;
    std::optional<RecallStats> recall;
    CostReport cost;
};

nlohmann::json eval_report_to_json(const EvalReport& report);
std::string format_eval_report(const EvalReport& report);

/// Prediction file helpers. The BIRD submission format maps question_id to
/// "<sql>\t----- bird -----\t<db_id>"; the plain format maps it to the SQL.
void write_predictions_bird(const std::filesystem::path& path,
                            const std::vector<std::pair<QuestionTask, std::string>>& predictions);
void write_predictions_plain(const std::filesystem::path& path,
                             const std::vector<std::pair<QuestionTask, std::string>>& predictions);
std::map<std::string, std::string> read_predictions(const std::filesystem::path& path);

}  // namespace sqlink
