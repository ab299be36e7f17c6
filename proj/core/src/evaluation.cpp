#include "sqlink/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sqlink/errors.hpp"
#include "sqlink/parallel.hpp"

namespace sqlink {

using nlohmann::json;

namespace {

constexpr const char* kBirdSeparator = "\t----- bird -----\t";

std::string bucket_key(const QuestionTask& task) {
    return task.difficulty.has_value() ? difficulty_name(*task.difficulty) : "unlabeled";
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

ExBreakdown evaluate_ex(const std::map<std::string, std::string>& predictions, const Dataset& dataset,
                        const EvalOptions& options) {
    struct PerQuestion {
        bool excluded = false;
        bool correct = false;
        std::string bucket;
        std::string id;
    };
    std::vector<PerQuestion> results(dataset.tasks.size());

    ExecOptions exec;
    exec.timeout = options.exec_timeout;
    exec.max_rows = options.exec_max_rows;

    parallel_for(dataset.tasks.size(), options.workers, [&](std::size_t i) {
        const QuestionTask& task = dataset.tasks[i];
        PerQuestion& r = results[i];
        r.bucket = bucket_key(task);
        r.id = task.question_id;
        if (task.gold_sql.empty()) {
            r.excluded = true;
            return;
        }
        ExecutionOutcome gold = execute_sql(dataset.database_path(task.db_id), task.gold_sql, exec);
        if (gold.status != ExecStatus::Ok) {
            r.excluded = true;
            return;
        }
        auto it = predictions.find(task.question_id);
        if (it == predictions.end() || it->second.empty()) {
            r.correct = false;  // missing prediction counts against the model
            return;
        }
        ExecutionOutcome pred = execute_sql(dataset.database_path(task.db_id), it->second, exec);
        r.correct = results_match(pred, gold);
    });

    ExBreakdown out;
    for (const PerQuestion& r : results) {
        if (r.excluded) {
            ++out.n_excluded;
            out.excluded_ids.push_back(r.id);
            continue;
        }
        ++out.n_evaluated;
        DifficultyBucket& bucket = out.buckets[r.bucket];
        ++bucket.total;
        if (r.correct) {
            ++bucket.correct;
            ++out.correct;
        }
    }
    return out;
}

double evaluate_ves(const std::map<std::string, std::string>& predictions, const Dataset& dataset,
                    const VesOptions& options) {
    if (options.timing_runs < 1) {
        throw Error(ErrorCode::BadConfig, "timing_runs must be >= 1");
    }
    ExecOptions exec;
    exec.timeout = options.exec_timeout;
    exec.max_rows = options.exec_max_rows;

    double reward_sum = 0.0;
    int evaluated = 0;
    for (const QuestionTask& task : dataset.tasks) {
        if (task.gold_sql.empty()) continue;
        std::filesystem::path db = dataset.database_path(task.db_id);
        ExecutionOutcome gold = execute_sql(db, task.gold_sql, exec);
        if (gold.status != ExecStatus::Ok) continue;  // same exclusion rule as EX

        ++evaluated;
        auto it = predictions.find(task.question_id);
        if (it == predictions.end() || it->second.empty()) continue;
        ExecutionOutcome pred = execute_sql(db, it->second, exec);
        if (!results_match(pred, gold)) continue;  // only valid queries earn efficiency reward

        // timing runs are serial on purpose: concurrent timing distorts ratios
        std::vector<double> gold_times;
        std::vector<double> pred_times;
        for (int run = 0; run < options.timing_runs; ++run) {
            gold_times.push_back(std::chrono::duration<double>(execute_sql(db, task.gold_sql, exec).elapsed).count());
            pred_times.push_back(std::chrono::duration<double>(execute_sql(db, it->second, exec).elapsed).count());
        }
        double gold_t = std::max(median(std::move(gold_times)), 1e-9);
        double pred_t = std::max(median(std::move(pred_times)), 1e-9);
        reward_sum += std::sqrt(gold_t / pred_t);
    }
    if (evaluated == 0) return 0.0;
    return 100.0 * reward_sum / static_cast<double>(evaluated);
}

CostReport cost_report(const std::vector<PipelineTrace>& traces, const PriceTable& prices) {
    CostReport report;
    report.n_traces = static_cast<int>(traces.size());
    for (const PipelineTrace& trace : traces) {
        report.prompt_tokens += trace.tokens.prompt;
        report.completion_tokens += trace.tokens.completion;
    }
    report.input_millions = static_cast<double>(report.prompt_tokens) / 1e6;
    report.output_millions = static_cast<double>(report.completion_tokens) / 1e6;
    report.cost_usd = report.input_millions * prices.input_per_million +
                      report.output_millions * prices.output_per_million;
    return report;
}

std::string format_cost_report(const CostReport& report) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-12s %-12s %-12s\n%-12.4f %-12.4f %-12.2f",
                  "Input(M)", "Output(M)", "Cost($)", report.input_millions, report.output_millions,
                  report.cost_usd);
    return buf;
}

json eval_report_to_json(const EvalReport& report) {
    json buckets = json::object();
    for (const auto& [name, bucket] : report.ex.buckets) {
        buckets[name] = {{"correct", bucket.correct}, {"total", bucket.total}, {"ex", bucket.percentage()}};
    }
    json out = {
        {"ex_total", report.ex.total_percentage()},
        {"ex_buckets", std::move(buckets)},
        {"n_evaluated", report.ex.n_evaluated},
        {"n_excluded", report.ex.n_excluded},
        {"cost",
         {{"prompt_tokens", report.cost.prompt_tokens},
          {"completion_tokens", report.cost.completion_tokens},
          {"input_millions", report.cost.input_millions},
          {"output_millions", report.cost.output_millions},
          {"cost_usd", report.cost.cost_usd}}},
    };
    if (report.ves.has_value()) out["ves"] = *report.ves;
    if (report.recall.has_value()) {
        out["recall"] = {{"nsr", report.recall->nsr},
                         {"srr", report.recall->srr},
                         {"avg_tables", report.recall->avg_tables},
                         {"avg_columns", report.recall->avg_columns},
                         {"n_questions", report.recall->n_questions}};
    }
    return out;
}

std::string format_eval_report(const EvalReport& report) {
    std::ostringstream out;
    static const char* order[] = {"simple", "moderate", "challenging", "unlabeled"};
    out << "Execution accuracy\n";
    char line[160];
    std::snprintf(line, sizeof(line), "  %-12s %8s %8s %8s\n", "bucket", "correct", "total", "EX");
    out << line;
    for (const char* name : order) {
        auto it = report.ex.buckets.find(name);
        if (it == report.ex.buckets.end()) continue;  // empty buckets stay absent
        std::snprintf(line, sizeof(line), "  %-12s %8d %8d %8.2f\n", name, it->second.correct,
                      it->second.total, it->second.percentage());
        out << line;
    }
    std::snprintf(line, sizeof(line), "  %-12s %8d %8d %8.2f\n", "total", report.ex.correct,
                  report.ex.n_evaluated, report.ex.total_percentage());
    out << line;
    if (report.ex.n_excluded > 0) {
        out << "  excluded (gold failed to execute): " << report.ex.n_excluded << "\n";
    }
    if (report.ves.has_value()) {
        std::snprintf(line, sizeof(line), "VES: %.2f\n", *report.ves);
        out << line;
    }
    if (report.recall.has_value()) {
        std::snprintf(line, sizeof(line), "Recall: NSR %.2f%%  SRR %.2f%%  Avg.T %.2f  Avg.C %.2f  (n=%d)\n",
                      100.0 * report.recall->nsr, 100.0 * report.recall->srr, report.recall->avg_tables,
                      report.recall->avg_columns, report.recall->n_questions);
        out << line;
    }
    if (report.cost.prompt_tokens > 0 || report.cost.completion_tokens > 0) {
        out << "Token cost\n" << format_cost_report(report.cost) << "\n";
    }
    return out.str();
}

void write_predictions_bird(const std::filesystem::path& path,
                            const std::vector<std::pair<QuestionTask, std::string>>& predictions) {
    json out = json::object();
    for (const auto& [task, sql] : predictions) {
        out[task.question_id] = sql + kBirdSeparator + task.db_id;
    }
    std::ofstream file(path);
    file << out.dump(2) << "\n";
}

void write_predictions_plain(const std::filesystem::path& path,
                             const std::vector<std::pair<QuestionTask, std::string>>& predictions) {
    json out = json::object();
    for (const auto& [task, sql] : predictions) {
        out[task.question_id] = sql;
    }
    std::ofstream file(path);
    file << out.dump(2) << "\n";
}

std::map<std::string, std::string> read_predictions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::FileNotFound, path.string());
    }
    json parsed = json::parse(in, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        throw Error(ErrorCode::MalformedDataset, path.string() + " is not a JSON object of predictions");
    }
    std::map<std::string, std::string> out;
    for (const auto& [qid, value] : parsed.items()) {
        if (!value.is_string()) continue;
        std::string sql = value.get<std::string>();
        std::size_t sep = sql.find(kBirdSeparator);
        if (sep != std::string::npos) sql = sql.substr(0, sep);
        out[qid] = sql;
    }
    return out;
}

}  // namespace sqlink
