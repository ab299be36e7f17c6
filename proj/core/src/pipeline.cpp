#include "sqlink/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json_locate.hpp"
#include "sqlink/errors.hpp"

namespace sqlink {

using nlohmann::json;

const char* difficulty_name(Difficulty difficulty) {
    switch (difficulty) {
        case Difficulty::Simple: return "simple";
        case Difficulty::Moderate: return "moderate";
        case Difficulty::Challenging: return "challenging";
    }
    return "simple";
}

std::optional<Difficulty> parse_difficulty(std::string_view text) {
    std::string lower;
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "simple") return Difficulty::Simple;
    if (lower == "moderate") return Difficulty::Moderate;
    if (lower == "challenging") return Difficulty::Challenging;
    return std::nullopt;
}

namespace {

std::string normalize_sql(std::string_view sql, bool fold_case) {
    std::string out;
    out.reserve(sql.size());
    bool in_space = false;
    for (char c : sql) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_space && !out.empty()) out.push_back(' ');
            in_space = true;
            continue;
        }
        in_space = false;
        out.push_back(fold_case ? static_cast<char>(std::tolower(static_cast<unsigned char>(c))) : c);
    }
    while (!out.empty() && (out.back() == ' ' || out.back() == ';')) out.pop_back();
    return out;
}

bool same_sql(const std::string& a, const std::string& b) {
    return normalize_sql(a, true) == normalize_sql(b, true);
}

bool outcome_is_unset(const ExecutionOutcome& o) {
    return o.status == ExecStatus::Error && o.error_message.empty() && o.rows.empty() && o.row_count == 0 &&
           o.column_count == 0;
}

std::string join_list(const std::vector<std::string>& items, const char* sep = ", ") {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += sep;
        out += items[i];
    }
    return out;
}

std::string or_none(std::string text) {
    return text.empty() ? "(none)" : text;
}

std::string preview_cell(const std::string& cell, int max_len) {
    std::string shown = cell;
    if (max_len > 0 && shown.size() > static_cast<std::size_t>(max_len)) {
        shown = shown.substr(0, static_cast<std::size_t>(max_len)) + "...";
    }
    if (shown == kNullCell) return "None";
    bool numeric = !shown.empty();
    std::size_t start = (shown[0] == '-' || shown[0] == '+') ? 1 : 0;
    bool dot = false;
    for (std::size_t i = start; i < shown.size() && numeric; ++i) {
        if (shown[i] == '.' && !dot) {
            dot = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(shown[i]))) numeric = false;
    }
    if (numeric && start < shown.size()) return shown;
    std::string quoted = "'";
    for (char c : shown) {
        quoted.push_back(c);
        if (c == '\'') quoted.push_back('\'');
    }
    quoted.push_back('\'');
    return quoted;
}

/// Execution rendering in the shape the selection prompt shows:
/// [Row_count, Column_count] = [1, 1] / [Result] = [('-',)]
std::string render_outcome(const ExecutionOutcome& outcome, int preview_rows, int preview_cell_len) {
    std::ostringstream out;
    if (outcome.status != ExecStatus::Ok) {
        out << "[Error] = " << (outcome.status == ExecStatus::Timeout ? "execution timed out"
                                                                      : outcome.error_message);
        return out.str();
    }
    out << "[Row_count, Column_count] = [" << outcome.row_count << ", "
        << (outcome.row_count == 0 ? 0 : outcome.column_count) << "]\n";
    out << "[Result] = [";
    long long shown = std::min<long long>(static_cast<long long>(outcome.rows.size()), preview_rows);
    for (long long r = 0; r < shown; ++r) {
        if (r > 0) out << ", ";
        const auto& row = outcome.rows[static_cast<std::size_t>(r)];
        out << "(";
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out << ", ";
            out << preview_cell(row[c], preview_cell_len);
        }
        if (row.size() == 1) out << ",";
        out << ")";
    }
    if (outcome.row_count > shown) out << ", ...";
    out << "]";
    return out.str();
}

std::string describe_risk(const ExecutionOutcome& outcome) {
    switch (outcome.status) {
        case ExecStatus::Error:
            return "Execution failed: " + outcome.error_message;
        case ExecStatus::Timeout:
            return "Execution timed out.";
        case ExecStatus::Ok:
            return "The query executed but returned an empty result (0 rows).";
    }
    return "Execution failed.";
}

json outcome_to_json(const ExecutionOutcome& outcome) {
    json rows = json::array();
    std::size_t shown = std::min<std::size_t>(outcome.rows.size(), 5);
    for (std::size_t i = 0; i < shown; ++i) rows.push_back(outcome.rows[i]);
    // elapsed intentionally omitted: replayed traces must be byte-identical
    return {
        {"status", exec_status_name(outcome.status)},
        {"row_count", outcome.row_count},
        {"column_count", outcome.column_count},
        {"error_message", outcome.error_message},
        {"rows_preview", std::move(rows)},
    };
}

json candidate_to_json(const SqlCandidate& candidate) {
    return {{"sql", candidate.sql}, {"execution", outcome_to_json(candidate.outcome)}};
}

constexpr const char* kJsonReminder =
    "\n\nReminder: respond with the requested JSON object only, no other text.";
constexpr const char* kSqlReminder =
    "\n\nReminder: respond with a single SQLite statement inside a ```sql code fence.";
constexpr const char* kChoiceReminder = "\n\nReminder: respond with exactly SQL1 or SQL2.";

}  // namespace

nlohmann::json trace_to_json(const PipelineTrace& trace) {
    json rounds = json::array();
    for (const CorrectionRound& round : trace.correction_rounds) {
        rounds.push_back({{"sql", round.sql},
                          {"error_info", round.error_info},
                          {"execution", outcome_to_json(round.outcome)}});
    }
    return {
        {"question_id", trace.question_id},
        {"db_id", trace.db_id},
        {"question", trace.question},
        {"forward_links", trace.forward_links.qualified_names()},
        {"backward_links", trace.backward_links.qualified_names()},
        {"linked", trace.linked.qualified_names()},
        {"full_schema_fallback", trace.full_schema_fallback},
        {"sql1", candidate_to_json(trace.sql1)},
        {"sql2", candidate_to_json(trace.sql2)},
        {"augmentation",
         {{"elements", trace.augmentation.elements},
          {"conditions", trace.augmentation.conditions},
          {"keywords", trace.augmentation.keywords},
          {"degraded", trace.augmentation.degraded}}},
        {"selection", {{"choice", trace.selection_choice}, {"rationale", trace.selection_rationale}}},
        {"sql3", candidate_to_json(trace.sql3)},
        {"correction_rounds", std::move(rounds)},
        {"final_sql", trace.final_sql},
        {"tokens", {{"prompt", trace.tokens.prompt}, {"completion", trace.tokens.completion}}},
        {"fingerprints", trace.fingerprints},
        {"flags", trace.flags},
    };
}

Pipeline::Pipeline(LlmGateway& gateway, const PromptLibrary& prompts, PipelineConfig config)
    : gateway_(gateway), prompts_(prompts), config_(std::move(config)) {}

ChatResponse Pipeline::chat_step(const std::string& tag, std::vector<ChatMessage> messages,
                                 PipelineTrace& trace) {
    ChatRequest request;
    request.messages = std::move(messages);
    request.model = config_.model;
    request.temperature = config_.temperature;
    request.max_tokens = config_.max_tokens;
    request.request_tag = tag;
    trace.fingerprints.push_back(request_fingerprint(request));
    ChatResponse response = gateway_.chat(request);
    trace.tokens.prompt += response.prompt_tokens;
    trace.tokens.completion += response.completion_tokens;
    return response;
}

std::string Pipeline::examples_block(const QuestionTask& task, const ExampleIndex* examples) const {
    if (examples == nullptr || config_.fewshot_k <= 0 || examples->size() == 0) return "(none)";
    std::ostringstream out;
    for (const ExamplePair& pair : examples->select_top_k(task.question, config_.fewshot_k)) {
        out << "Question: " << pair.question << "\nSQL: " << pair.sql << "\n\n";
    }
    std::string text = out.str();
    while (!text.empty() && text.back() == '\n') text.pop_back();
    return or_none(text);
}

SqlCandidate Pipeline::execute_candidate(const DatabaseContext& db, std::string sql) const {
    SqlCandidate candidate;
    candidate.sql = std::move(sql);
    ExecOptions options;
    options.timeout = config_.exec_timeout;
    options.max_rows = config_.exec_max_rows;
    candidate.outcome = execute_sql(db.db_path, candidate.sql, options);
    return candidate;
}

Step1Result Pipeline::step1_bsl(const QuestionTask& task, const DatabaseContext& db,
                                const ExampleIndex* examples, PipelineTrace& trace) {
    Step1Result result;
    RenderOptions structure_only{.include_samples = false, .include_descriptions = false};
    std::string schema_text = render_schema_prompt(db.catalog, db.samples, nullptr, nullptr, structure_only);
    std::string samples_text = or_none(render_samples_block(db.catalog, db.samples));
    std::string evidence_text = or_none(task.evidence);

    // forward schema linking
    SchemaSet forward;
    std::string forward_user = render_template(prompts_.get("forward_link"),
                                               {{"schema", schema_text},
                                                {"samples", samples_text},
                                                {"question", task.question},
                                                {"evidence", evidence_text}});
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string content = forward_user + (attempt == 1 ? kJsonReminder : "");
        ChatResponse response = chat_step("forward_link",
                                          {{Role::System, prompts_.get("system")}, {Role::User, content}}, trace);
        try {
            int dropped = 0;
            forward = parse_forward_response(response.content, db.catalog, &dropped);
            if (dropped > 0) trace.flags.push_back("forward_dropped:" + std::to_string(dropped));
            break;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptyLink) throw;
            if (attempt == 1) trace.flags.push_back("forward_empty");
        }
    }
    forward = augment_with_evidence(forward, task.evidence, db.catalog);

    // preliminary SQL over the full schema, descriptions deliberately absent
    std::string preliminary_user =
        render_template(prompts_.get("preliminary_sql"), {{"schema", schema_text},
                                                          {"samples", samples_text},
                                                          {"examples", examples_block(task, examples)},
                                                          {"fwd_links", or_none(join_list(forward.qualified_names()))},
                                                          {"question", task.question},
                                                          {"evidence", evidence_text}});
    std::string sql1_text;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string content = preliminary_user + (attempt == 1 ? kSqlReminder : "");
        ChatResponse response = chat_step("preliminary_sql",
                                          {{Role::System, prompts_.get("system")}, {Role::User, content}}, trace);
        try {
            sql1_text = extract_sql(response.content);
            break;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoSqlFound || attempt == 1) throw;
        }
    }
    result.sql1 = execute_candidate(db, sql1_text);

    SchemaSet backward = backward_link(sql1_text, db.catalog, config_.backward_strategy);
    result.links = LinkedSchema::combine(std::move(forward), std::move(backward));

    if (result.links.merged.empty()) {
        result.full_schema_fallback = true;
    } else {
        try {
            SimplifyOptions options;
            options.retain_keys = config_.retain_keys;
            result.simplified =
                simplify_schema(db.catalog, db.samples, db.descriptions, result.links.merged, options);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptyLink) throw;
            result.full_schema_fallback = true;
        }
    }
    if (result.full_schema_fallback) {
        trace.flags.push_back("full_schema_fallback");
        result.simplified = SimplifiedCatalog{db.catalog, db.samples, db.descriptions};
    }
    return result;
}

Step2Result Pipeline::step2_cia(const QuestionTask& task, const DatabaseContext& db,
                                const SimplifiedCatalog& simplified, const ExampleIndex* examples,
                                PipelineTrace& trace) {
    Step2Result result;
    RenderOptions structure_only{.include_samples = false, .include_descriptions = false};
    std::string schema_text =
        render_schema_prompt(simplified.catalog, simplified.samples, nullptr, nullptr, structure_only);
    std::string samples_text = or_none(render_samples_block(simplified.catalog, simplified.samples));
    std::string descriptions_text = or_none(render_descriptions_block(simplified.catalog, simplified.descriptions));
    std::string evidence_text = or_none(task.evidence);

    // components call: H_E, H_C, H_K
    std::string components_user = render_template(prompts_.get("components"),
                                                  {{"schema", schema_text},
                                                   {"samples", samples_text},
                                                   {"descriptions", descriptions_text},
                                                   {"question", task.question},
                                                   {"evidence", evidence_text}});
    StructuredReply structured;
    bool components_ok = false;
    for (int attempt = 0; attempt < 2 && !components_ok; ++attempt) {
        std::string content = components_user + (attempt == 1 ? kJsonReminder : "");
        try {
            ChatResponse response = chat_step(
                "components", {{Role::System, prompts_.get("system")}, {Role::User, content}}, trace);
            structured = extract_structured(response.content, {"elements", "conditions", "keywords"});
            components_ok = true;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoStructureFound) throw;
        }
    }
    if (components_ok) {
        for (const std::string& element : structured.fields["elements"]) {
            // keep only elements that exist in the simplified schema
            std::size_t dot = element.find('.');
            if (dot == std::string::npos) {
                if (simplified.catalog.has_table(element)) result.augmentation.elements.push_back(element);
            } else if (simplified.catalog.find_column(element.substr(0, dot), element.substr(dot + 1)) != nullptr) {
                result.augmentation.elements.push_back(element);
            }
        }
        result.augmentation.conditions = structured.fields["conditions"];
        result.augmentation.keywords = structured.fields["keywords"];
        if (structured.degraded()) {
            trace.flags.push_back("components_missing:" + join_list(structured.missing));
        }
    } else {
        result.augmentation.degraded = true;
        trace.flags.push_back("components_failed");
    }

    std::ostringstream components_text;
    components_text << "Elements: " << or_none(join_list(result.augmentation.elements)) << "\n"
                    << "Conditions: " << or_none(join_list(result.augmentation.conditions, "; ")) << "\n"
                    << "Keywords: " << or_none(join_list(result.augmentation.keywords));

    std::string generation_user = render_template(prompts_.get("simplified_sql"),
                                                  {{"schema", schema_text},
                                                   {"samples", samples_text},
                                                   {"descriptions", descriptions_text},
                                                   {"components", components_text.str()},
                                                   {"examples", examples_block(task, examples)},
                                                   {"question", task.question},
                                                   {"evidence", evidence_text}});
    std::string sql2_text;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string content = generation_user + (attempt == 1 ? kSqlReminder : "");
        ChatResponse response = chat_step("simplified_sql",
                                          {{Role::System, prompts_.get("system")}, {Role::User, content}}, trace);
        try {
            sql2_text = extract_sql(response.content);
            break;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoSqlFound || attempt == 1) throw;
        }
    }
    result.sql2 = execute_candidate(db, sql2_text);
    return result;
}

Step3Result Pipeline::step3_bss(const QuestionTask& task, const DatabaseContext& db,
                                const SimplifiedCatalog& simplified, const ExampleIndex* examples,
                                SqlCandidate sql1, SqlCandidate sql2, PipelineTrace& trace) {
    Step3Result result;
    if (same_sql(sql1.sql, sql2.sql)) {
        // identical candidates: no selection call, no tokens spent
        if (outcome_is_unset(sql1.outcome)) sql1 = execute_candidate(db, sql1.sql);
        result.sql3 = std::move(sql1);
        result.choice = "sql1";
        result.rationale = "candidates identical";
        return result;
    }
    if (outcome_is_unset(sql1.outcome)) sql1 = execute_candidate(db, sql1.sql);
    if (outcome_is_unset(sql2.outcome)) sql2 = execute_candidate(db, sql2.sql);

    RenderOptions structure_only{.include_samples = false, .include_descriptions = false};
    std::ostringstream candidates;
    candidates << "SQL1: " << sql1.sql << "\nSQL1 execution:\n"
               << render_outcome(sql1.outcome, config_.preview_rows, config_.preview_cell_len) << "\n\n"
               << "SQL2: " << sql2.sql << "\nSQL2 execution:\n"
               << render_outcome(sql2.outcome, config_.preview_rows, config_.preview_cell_len);

    std::string selection_user = render_template(
        prompts_.get("selection"),
        {{"schema", render_schema_prompt(simplified.catalog, simplified.samples, nullptr, nullptr, structure_only)},
         {"samples", or_none(render_samples_block(simplified.catalog, simplified.samples))},
         {"descriptions", or_none(render_descriptions_block(simplified.catalog, simplified.descriptions))},
         {"examples", examples_block(task, examples)},
         {"question", task.question},
         {"evidence", or_none(task.evidence)},
         {"candidates", candidates.str()}});

    auto parse_choice = [&](const std::string& reply) -> std::optional<std::string> {
        std::string lower;
        for (char c : reply) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        auto find_word = [&](std::string_view word) {
            std::size_t pos = lower.find(word);
            while (pos != std::string::npos) {
                bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(lower[pos - 1]));
                std::size_t end = pos + word.size();
                bool right = end == lower.size() || !std::isalnum(static_cast<unsigned char>(lower[end]));
                if (left && right) return true;
                pos = lower.find(word, pos + 1);
            }
            return false;
        };
        bool has1 = find_word("sql1");
        bool has2 = find_word("sql2");
        if (has1 != has2) return has1 ? std::string("sql1") : std::string("sql2");
        // maybe the model echoed a full query instead of a label
        try {
            std::string echoed = extract_sql(reply);
            if (same_sql(echoed, sql1.sql)) return std::string("sql1");
            if (same_sql(echoed, sql2.sql)) return std::string("sql2");
        } catch (const Error&) {
        }
        return std::nullopt;
    };

    std::optional<std::string> choice;
    std::string last_reply;
    for (int attempt = 0; attempt < 2 && !choice.has_value(); ++attempt) {
        std::string content = selection_user + (attempt == 1 ? kChoiceReminder : "");
        ChatResponse response =
            chat_step("selection", {{Role::System, prompts_.get("system")}, {Role::User, content}}, trace);
        last_reply = response.content;
        choice = parse_choice(response.content);
    }
    if (!choice.has_value()) {
        trace.flags.push_back("selection_unparseable");
        choice = "sql1";
    }
    result.choice = *choice;
    result.rationale = last_reply.substr(0, 500);
    result.sql3 = (*choice == "sql1") ? std::move(sql1) : std::move(sql2);
    return result;
}

Step4Result Pipeline::step4_mtsc(const QuestionTask& task, const DatabaseContext& db,
                                 const SimplifiedCatalog& simplified, const ExampleIndex* examples,
                                 const SqlCandidate& sql3, PipelineTrace& trace) {
    Step4Result result;
    result.final_candidate = sql3;
    if (outcome_is_unset(result.final_candidate.outcome) && !result.final_candidate.sql.empty()) {
        result.final_candidate = execute_candidate(db, result.final_candidate.sql);
    }

    RenderOptions structure_only{.include_samples = false, .include_descriptions = false};
    std::vector<ChatMessage> conversation{{Role::System, prompts_.get("system")}};

    int round = 0;
    while (round < config_.max_correction_rounds &&
           classify_risk(result.final_candidate.outcome) == RiskLevel::High) {
        std::string error_info = describe_risk(result.final_candidate.outcome);
        std::string user;
        if (round == 0) {
            user = render_template(
                prompts_.get("correction"),
                {{"schema",
                  render_schema_prompt(simplified.catalog, simplified.samples, nullptr, nullptr, structure_only)},
                 {"samples", or_none(render_samples_block(simplified.catalog, simplified.samples))},
                 {"descriptions", or_none(render_descriptions_block(simplified.catalog, simplified.descriptions))},
                 {"examples", examples_block(task, examples)},
                 {"question", task.question},
                 {"evidence", or_none(task.evidence)},
                 {"candidates", result.final_candidate.sql},
                 {"errors", error_info}});
        } else {
            user = render_template(prompts_.get("correction_followup"), {{"errors", error_info}});
        }
        conversation.push_back({Role::User, user});

        std::string corrected;
        try {
            ChatResponse response = chat_step("correction", conversation, trace);
            corrected = extract_sql(response.content);
            conversation.push_back({Role::Assistant, response.content});
        } catch (const Error& e) {
            trace.flags.push_back(std::string("correction_aborted:") + error_code_name(e.code()));
            break;
        }

        SqlCandidate candidate = execute_candidate(db, corrected);
        result.rounds.push_back({corrected, error_info, candidate.outcome});
        result.final_candidate = std::move(candidate);
        ++round;
    }
    return result;
}

PipelineTrace Pipeline::run(const QuestionTask& task, const DatabaseContext& db, const ExampleIndex* examples) {
    PipelineTrace trace;
    trace.question_id = task.question_id;
    trace.db_id = task.db_id;
    trace.question = task.question;

    SimplifiedCatalog simplified{db.catalog, db.samples, db.descriptions};
    SqlCandidate sql1;
    SqlCandidate sql2;

    try {
        Step1Result step1 = step1_bsl(task, db, examples, trace);
        trace.forward_links = step1.links.forward;
        trace.backward_links = step1.links.backward;
        trace.linked = step1.links.merged;
        trace.full_schema_fallback = step1.full_schema_fallback;
        trace.sql1 = step1.sql1;
        sql1 = std::move(step1.sql1);
        simplified = std::move(step1.simplified);
    } catch (const Error& e) {
        trace.flags.push_back(std::string("step1_error:") + error_code_name(e.code()));
        trace.full_schema_fallback = true;
    }

    try {
        Step2Result step2 = step2_cia(task, db, simplified, examples, trace);
        trace.augmentation = step2.augmentation;
        trace.sql2 = step2.sql2;
        sql2 = std::move(step2.sql2);
    } catch (const Error& e) {
        trace.flags.push_back(std::string("step2_error:") + error_code_name(e.code()));
    }

    SqlCandidate sql3;
    if (sql1.sql.empty() && sql2.sql.empty()) {
        trace.flags.push_back("no_candidates");
        trace.final_sql = "";
        return trace;
    }
    if (sql1.sql.empty() || sql2.sql.empty()) {
        sql3 = sql1.sql.empty() ? sql2 : sql1;
        trace.selection_choice = sql1.sql.empty() ? "sql2" : "sql1";
        trace.selection_rationale = "only candidate available";
        trace.flags.push_back("selection_skipped");
    } else {
        try {
            Step3Result step3 = step3_bss(task, db, simplified, examples, sql1, sql2, trace);
            sql3 = std::move(step3.sql3);
            trace.selection_choice = step3.choice;
            trace.selection_rationale = step3.rationale;
        } catch (const Error& e) {
            trace.flags.push_back(std::string("step3_error:") + error_code_name(e.code()));
            sql3 = sql1;
            trace.selection_choice = "sql1";
            trace.selection_rationale = "selection errored, defaulting to sql1";
        }
    }
    trace.sql3 = sql3;

    Step4Result step4 = step4_mtsc(task, db, simplified, examples, sql3, trace);
    trace.correction_rounds = step4.rounds;
    trace.final_sql = step4.final_candidate.sql;
    return trace;
}

// ---- description generation ----

SchemaDescriptions generate_descriptions(LlmGateway& gateway, const PromptLibrary& prompts,
                                         const DatabaseContext& db, const PipelineConfig& config,
                                         const std::filesystem::path& cache_dir) {
    std::map<std::pair<std::string, std::string>, std::string> column_texts;
    std::map<std::string, std::string> table_texts;

    std::filesystem::path db_dir = cache_dir / db.catalog.db_id();
    std::filesystem::create_directories(db_dir);

    for (const TableInfo& table : db.catalog.tables()) {
        std::filesystem::path cache_file = db_dir / (table.name + ".json");
        json payload;
        if (std::filesystem::exists(cache_file)) {
            std::ifstream in(cache_file);
            payload = json::parse(in, nullptr, false);
        }
        if (!payload.is_object()) {
            SchemaSet subset;
            subset.add_table(table.name);
            for (const ColumnInfo& c : table.columns) subset.add_column(table.name, c.name);
            RenderOptions structure_only{.include_samples = false, .include_descriptions = false};
            std::string user = render_template(
                prompts.get("describe_table"),
                {{"schema", render_schema_prompt(db.catalog, db.samples, nullptr, &subset, structure_only)},
                 {"samples", or_none(render_samples_block(db.catalog, db.samples, &subset))}});

            ChatRequest request;
            request.messages = {{Role::System, prompts.get("system")}, {Role::User, user}};
            request.model = config.model;
            request.temperature = config.temperature;
            request.max_tokens = config.max_tokens;
            request.request_tag = "describe_table";
            ChatResponse response = gateway.chat(request);

            auto located = detail::locate_json_payload(response.content);
            if (!located.has_value() || !located->is_object()) {
                throw Error(ErrorCode::NoStructureFound, "describe reply for table " + table.name);
            }
            payload = *located;
            std::ofstream out(cache_file);
            out << payload.dump(2) << "\n";
        }

        if (payload.contains("table_description") && payload["table_description"].is_string()) {
            table_texts[table.name] = payload["table_description"].get<std::string>();
        }
        if (payload.contains("columns") && payload["columns"].is_object()) {
            for (const auto& [column, text] : payload["columns"].items()) {
                if (text.is_string()) column_texts[{table.name, column}] = text.get<std::string>();
            }
        }
    }
    return descriptions_from_map(db.catalog, column_texts, table_texts);
}

SchemaDescriptions load_generated_descriptions(const DatabaseCatalog& catalog,
                                               const std::filesystem::path& cache_dir) {
    std::map<std::pair<std::string, std::string>, std::string> column_texts;
    std::map<std::string, std::string> table_texts;
    std::filesystem::path db_dir = cache_dir / catalog.db_id();
    if (!std::filesystem::exists(db_dir)) {
        return SchemaDescriptions{};
    }
    for (const auto& entry : std::filesystem::directory_iterator(db_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path());
        json payload = json::parse(in, nullptr, false);
        if (!payload.is_object()) continue;
        std::string table = entry.path().stem().string();
        if (payload.contains("table_description") && payload["table_description"].is_string()) {
            table_texts[table] = payload["table_description"].get<std::string>();
        }
        if (payload.contains("columns") && payload["columns"].is_object()) {
            for (const auto& [column, text] : payload["columns"].items()) {
                if (text.is_string()) column_texts[{table, column}] = text.get<std::string>();
            }
        }
    }
    return descriptions_from_map(catalog, column_texts, table_texts);
}

}  // namespace sqlink
