#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sqlink/fewshot.hpp"
#include "sqlink/llm_gateway.hpp"
#include "sqlink/prompts.hpp"
#include "sqlink/schema_catalog.hpp"
#include "sqlink/schema_linking.hpp"
#include "sqlink/sql_analysis.hpp"

namespace sqlink {

enum class Difficulty { Simple, Moderate, Challenging };

const char* difficulty_name(Difficulty difficulty);
std::optional<Difficulty> parse_difficulty(std::string_view text);

struct QuestionTask {
    std::string question_id;
    std::string db_id;
    std::string question;
    std::string evidence;   // optional external knowledge (C)
    std::string gold_sql;   // optional
    std::optional<Difficulty> difficulty;
};

/// Pre-generated SQL components plus the restricted descriptions they ride
/// with: elements, conditions, keywords.
struct ContextAugmentation {
    std::vector<std::string> elements;
    std::vector<std::string> conditions;
    std::vector<std::string> keywords;
    bool degraded = false;  // components call failed or came back unusable
};

struct SqlCandidate {
    std::string sql;
    ExecutionOutcome outcome;
};

struct CorrectionRound {
    std::string sql;         // candidate produced by this round
    std::string error_info;  // the E^(i) shown to the model to obtain it
    ExecutionOutcome outcome;
};

struct TokenTotals {
    long long prompt = 0;
    long long completion = 0;
};

/// Per-question record of everything the four steps produced.
struct PipelineTrace {
    std::string question_id;
    std::string db_id;
    std::string question;
    SchemaSet forward_links;
    SchemaSet backward_links;
    SchemaSet linked;  // union used for simplification
    bool full_schema_fallback = false;
    SqlCandidate sql1;
    SqlCandidate sql2;
    ContextAugmentation augmentation;
    std::string selection_choice;      // "sql1" | "sql2"
    std::string selection_rationale;
    SqlCandidate sql3;
    std::vector<CorrectionRound> correction_rounds;
    std::string final_sql;
    TokenTotals tokens;
    std::vector<std::string> fingerprints;  // request fingerprints, call order
    std::vector<std::string> flags;         // fallbacks, degradations, errors
};

nlohmann::json trace_to_json(const PipelineTrace& trace);

struct PipelineConfig {
    std::string model = "gpt-4o";
    double temperature = 0.0;
    int max_tokens = 1024;
    int fewshot_k = 5;
    int max_correction_rounds = 5;  // N
    std::chrono::milliseconds exec_timeout{30000};
    long long exec_max_rows = 10000;
    int preview_rows = 5;        // execution-result preview cap in prompts
    int preview_cell_len = 200;
    bool retain_keys = false;
    BackwardStrategy backward_strategy = BackwardStrategy::NameMatch;
};

/// Everything the pipeline needs to know about one database.
struct DatabaseContext {
    std::filesystem::path db_path;
    DatabaseCatalog catalog;
    ValueSamples samples;
    SchemaDescriptions descriptions;
};

struct Step1Result {
    LinkedSchema links;
    SqlCandidate sql1;
    SimplifiedCatalog simplified;
    bool full_schema_fallback = false;
};

struct Step2Result {
    ContextAugmentation augmentation;
    SqlCandidate sql2;
};

struct Step3Result {
    SqlCandidate sql3;
    std::string choice;     // "sql1" | "sql2"
    std::string rationale;
};

struct Step4Result {
    SqlCandidate final_candidate;
    std::vector<CorrectionRound> rounds;
};

/// Orchestrates the four steps for one question at a time. Instances are
/// independent; run one per worker for concurrent questions.
class Pipeline {
public:
    Pipeline(LlmGateway& gateway, const PromptLibrary& prompts, PipelineConfig config);

    Step1Result step1_bsl(const QuestionTask& task, const DatabaseContext& db, const ExampleIndex* examples,
                          PipelineTrace& trace);
    Step2Result step2_cia(const QuestionTask& task, const DatabaseContext& db, const SimplifiedCatalog& simplified,
                          const ExampleIndex* examples, PipelineTrace& trace);
    Step3Result step3_bss(const QuestionTask& task, const DatabaseContext& db, const SimplifiedCatalog& simplified,
                          const ExampleIndex* examples, SqlCandidate sql1, SqlCandidate sql2, PipelineTrace& trace);
    Step4Result step4_mtsc(const QuestionTask& task, const DatabaseContext& db, const SimplifiedCatalog& simplified,
                           const ExampleIndex* examples, const SqlCandidate& sql3, PipelineTrace& trace);

    PipelineTrace run(const QuestionTask& task, const DatabaseContext& db, const ExampleIndex* examples = nullptr);

    const PipelineConfig& config() const { return config_; }

private:
    ChatResponse chat_step(const std::string& tag, std::vector<ChatMessage> messages, PipelineTrace& trace);
    std::string examples_block(const QuestionTask& task, const ExampleIndex* examples) const;
    SqlCandidate execute_candidate(const DatabaseContext& db, std::string sql) const;

    LlmGateway& gateway_;
    const PromptLibrary& prompts_;
    PipelineConfig config_;
};

/// Batch helper for the `describe` command: one LLM call per table, cached on
/// disk under <cache_dir>/<db_id>/<table>.json.
SchemaDescriptions generate_descriptions(LlmGateway& gateway, const PromptLibrary& prompts,
                                         const DatabaseContext& db, const PipelineConfig& config,
                                         const std::filesystem::path& cache_dir);

/// Loads descriptions previously produced by generate_descriptions.
SchemaDescriptions load_generated_descriptions(const DatabaseCatalog& catalog,
                                               const std::filesystem::path& cache_dir);

}  // namespace sqlink
