#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "sqlink/dataset.hpp"
#include "sqlink/llm_gateway.hpp"
#include "sqlink/pipeline.hpp"

namespace sqlink::testing {

/// Unique directory under the system temp root, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

void exec_ddl(const std::filesystem::path& db_path, const std::vector<std::string>& statements);

/// molecule / atom / bond, including the TR151 row the selection case needs.
void make_toxicology_db(const std::filesystem::path& db_path);

/// player / player_attributes, with two players tied at the lowest potential.
void make_football_db(const std::filesystem::path& db_path);

/// Writes the BIRD-style tree <root>/<db_id>/<db_id>.sqlite for both fixture
/// databases and returns the db-root directory.
std::filesystem::path write_fixture_db_tree(const std::filesystem::path& root);

/// 20-question BIRD-shaped dataset over the two fixture databases; every gold
/// query executes and returns at least one row.
std::filesystem::path write_ex_dataset(const std::filesystem::path& root);

/// Deterministic in-process backend driven by a reply function.
class ScriptedBackend : public LlmBackend {
public:
    using Handler = std::function<std::string(const ChatRequest&)>;
    explicit ScriptedBackend(Handler handler) : handler_(std::move(handler)) {}

    ChatResponse complete(const ChatRequest& request) override;
    BackendKind kind() const override { return BackendKind::Scripted; }

private:
    Handler handler_;
};

/// One end-to-end replay case: the task plus every canned model reply.
struct FixtureCase {
    QuestionTask task;
    std::string forward_reply;
    std::string sql1_reply;
    std::string components_reply;
    std::string sql2_reply;
    std::string selection_reply;
    std::vector<std::string> correction_replies;  // indexed by completed round count
    std::string expected_final_sql;               // compared whitespace-normalized
};

/// The replay corpus, including the TR151 and lowest-potential case studies.
std::vector<FixtureCase> fixture_cases();

/// Reply function covering every fixture case, keyed on the question text
/// embedded in the prompt and the request tag.
ScriptedBackend::Handler scripted_corpus_handler(std::vector<FixtureCase> cases);

DatabaseContext make_db_context(const std::filesystem::path& db_path, unsigned sample_seed = 7,
                                int rows_per_table = 3, int max_cell_len = 64);

/// Collapses whitespace runs and trims trailing semicolons, the comparison
/// used for "byte-identical after whitespace normalization".
std::string normalize_ws(const std::string& sql);

}  // namespace sqlink::testing
