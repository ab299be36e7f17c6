#include "fixtures.hpp"

#include <sqlite3.h>

#include <atomic>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace sqlink::testing {

using nlohmann::json;

TempDir::TempDir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("sqlink_test_" + std::to_string(rd()) + "_" + std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

void exec_ddl(const std::filesystem::path& db_path, const std::vector<std::string>& statements) {
    sqlite3* db = nullptr;
    if (sqlite3_open(db_path.string().c_str(), &db) != SQLITE_OK) {
        throw std::runtime_error("cannot create fixture db " + db_path.string());
    }
    for (const std::string& sql : statements) {
        char* err = nullptr;
        if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
            std::string message = err ? err : "unknown error";
            sqlite3_free(err);
            sqlite3_close(db);
            throw std::runtime_error("fixture DDL failed: " + message + " in: " + sql);
        }
    }
    sqlite3_close(db);
}

void make_toxicology_db(const std::filesystem::path& db_path) {
    exec_ddl(db_path, {
        "CREATE TABLE molecule (molecule_id TEXT PRIMARY KEY, label TEXT)",
        "CREATE TABLE atom (atom_id TEXT PRIMARY KEY, molecule_id TEXT, element TEXT, "
        "FOREIGN KEY (molecule_id) REFERENCES molecule (molecule_id))",
        "CREATE TABLE bond (bond_id TEXT PRIMARY KEY, molecule_id TEXT, bond_type TEXT, "
        "FOREIGN KEY (molecule_id) REFERENCES molecule (molecule_id))",
        "INSERT INTO molecule VALUES ('TR000', '+'), ('TR151', '-'), ('TR152', '+'), ('TR153', '-'), "
        "('TR154', '+')",
        "INSERT INTO atom VALUES "
        "('TR000_1', 'TR000', 'c'), ('TR000_2', 'TR000', 'h'), "
        "('TR151_1', 'TR151', 'o'), ('TR151_2', 'TR151', 'n'), ('TR151_3', 'TR151', 'c'), "
        "('TR152_1', 'TR152', 'cl'), ('TR153_1', 'TR153', 's')",
        "INSERT INTO bond VALUES "
        "('TR000_b1', 'TR000', '-'), ('TR151_b1', 'TR151', '='), ('TR151_b2', 'TR151', '-'), "
        "('TR152_b1', 'TR152', '#')",
    });
}

void make_football_db(const std::filesystem::path& db_path) {
    exec_ddl(db_path, {
        "CREATE TABLE player (id INTEGER PRIMARY KEY, player_api_id INTEGER, player_name TEXT)",
        "CREATE TABLE player_attributes (id INTEGER PRIMARY KEY, player_api_id INTEGER, "
        "potential INTEGER, preferred_foot TEXT, crossing INTEGER, "
        "FOREIGN KEY (player_api_id) REFERENCES player (player_api_id))",
        "INSERT INTO player VALUES (1, 101, 'Ada Lovelace'), (2, 102, 'Alan Turing'), "
        "(3, 103, 'Grace Hopper'), (4, 104, 'Edsger Dijkstra')",
        // two players tied at the lowest potential, different feet
        "INSERT INTO player_attributes VALUES "
        "(1, 101, 92, 'right', 80), (2, 102, 61, 'left', 55), (3, 103, 61, 'right', 58), "
        "(4, 104, 85, 'left', 70)",
    });
}

std::filesystem::path write_fixture_db_tree(const std::filesystem::path& root) {
    std::filesystem::create_directories(root / "toxicology_mini");
    std::filesystem::create_directories(root / "football_mini");
    make_toxicology_db(root / "toxicology_mini" / "toxicology_mini.sqlite");
    make_football_db(root / "football_mini" / "football_mini.sqlite");
    return root;
}

std::filesystem::path write_ex_dataset(const std::filesystem::path& root) {
    write_fixture_db_tree(root);

    struct Q {
        const char* db;
        const char* question;
        const char* sql;
    };
    // every query returns at least one row on the fixture data
    static const Q questions[] = {
        {"toxicology_mini", "Is molecule TR151 carcinogenic?",
         "SELECT label FROM molecule WHERE molecule_id = 'TR151'"},
        {"toxicology_mini", "How many molecules are there?", "SELECT COUNT(*) FROM molecule"},
        {"toxicology_mini", "List carcinogenic molecule ids.",
         "SELECT molecule_id FROM molecule WHERE label = '+'"},
        {"toxicology_mini", "How many atoms does TR151 have?",
         "SELECT COUNT(*) FROM atom WHERE molecule_id = 'TR151'"},
        {"toxicology_mini", "Which elements appear in TR151?",
         "SELECT DISTINCT element FROM atom WHERE molecule_id = 'TR151'"},
        {"toxicology_mini", "Count atoms per molecule.",
         "SELECT molecule_id, COUNT(*) FROM atom GROUP BY molecule_id"},
        {"toxicology_mini", "Which molecules have a double bond?",
         "SELECT DISTINCT molecule_id FROM bond WHERE bond_type = '='"},
        {"toxicology_mini", "How many bonds does TR151 have?",
         "SELECT COUNT(*) FROM bond WHERE molecule_id = 'TR151'"},
        {"toxicology_mini", "List molecules with their atom counts.",
         "SELECT m.molecule_id, COUNT(a.atom_id) FROM molecule m JOIN atom a ON m.molecule_id = "
         "a.molecule_id GROUP BY m.molecule_id"},
        {"toxicology_mini", "What label does TR000 carry?",
         "SELECT label FROM molecule WHERE molecule_id = 'TR000'"},
        {"football_mini", "What is the preferred foot of the player with the lowest potential?",
         "SELECT preferred_foot FROM player_attributes WHERE potential = (SELECT MIN(potential) FROM "
         "player_attributes)"},
        {"football_mini", "How many players are there?", "SELECT COUNT(*) FROM player"},
        {"football_mini", "What is the highest potential?", "SELECT MAX(potential) FROM player_attributes"},
        {"football_mini", "List all player names.", "SELECT player_name FROM player"},
        {"football_mini", "Which players prefer the left foot?",
         "SELECT player_api_id FROM player_attributes WHERE preferred_foot = 'left'"},
        {"football_mini", "What is the average crossing?", "SELECT AVG(crossing) FROM player_attributes"},
        {"football_mini", "Name the player with the highest potential.",
         "SELECT p.player_name FROM player p JOIN player_attributes pa ON p.player_api_id = "
         "pa.player_api_id ORDER BY pa.potential DESC LIMIT 1"},
        {"football_mini", "How many players have potential above 80?",
         "SELECT COUNT(*) FROM player_attributes WHERE potential > 80"},
        {"football_mini", "List potentials in descending order.",
         "SELECT potential FROM player_attributes ORDER BY potential DESC"},
        {"football_mini", "What feet are preferred overall?",
         "SELECT DISTINCT preferred_foot FROM player_attributes"},
    };
    static const char* difficulties[] = {"simple", "moderate", "challenging"};

    json records = json::array();
    int index = 0;
    for (const Q& q : questions) {
        records.push_back({
            {"question_id", std::to_string(index)},
            {"db_id", q.db},
            {"question", q.question},
            {"evidence", ""},
            {"SQL", q.sql},
            {"difficulty", difficulties[index % 3]},
        });
        ++index;
    }
    std::filesystem::path path = root / "ex_dataset.json";
    std::ofstream out(path);
    out << records.dump(2) << "\n";
    return path;
}

ChatResponse ScriptedBackend::complete(const ChatRequest& request) {
    std::string content = handler_(request);
    ChatResponse response;
    response.content = content;
    long long prompt_chars = 0;
    for (const ChatMessage& m : request.messages) prompt_chars += static_cast<long long>(m.content.size());
    response.prompt_tokens = prompt_chars / 4 + 1;
    response.completion_tokens = static_cast<long long>(content.size()) / 4 + 1;
    response.backend = BackendKind::Scripted;
    return response;
}

namespace {

std::string fenced(const std::string& sql) {
    return "```sql\n" + sql + "\n```";
}

}  // namespace

std::vector<FixtureCase> fixture_cases() {
    std::vector<FixtureCase> cases;

    auto add = [&](FixtureCase c) { cases.push_back(std::move(c)); };

    // 1. the TR151 selection case: SQL2 over-filters, execution comparison
    //    drives the choice back to SQL1
    {
        FixtureCase c;
        c.task = {"e2e_0", "toxicology_mini", "Is molecule TR151 carcinogenic?",
                  "carcinogenic refers to label = '+'", "", Difficulty::Simple};
        c.forward_reply = R"({"tables": ["molecule"], "columns": ["molecule.label", "molecule.molecule_id"]})";
        c.sql1_reply = fenced("SELECT label FROM molecule WHERE molecule_id = 'TR151'");
        c.components_reply =
            R"({"elements": ["molecule.label", "molecule.molecule_id"], "conditions": ["molecule id is TR151"], "keywords": ["="]})";
        c.sql2_reply = fenced("SELECT label FROM molecule WHERE molecule_id = 'TR151' AND label = '+'");
        c.selection_reply = "SQL1";
        c.expected_final_sql = "SELECT label FROM molecule WHERE molecule_id = 'TR151'";
        add(std::move(c));
    }

    // 2. forward linking misses a column that SQL1 uses; the union recovers it
    {
        FixtureCase c;
        c.task = {"e2e_1", "toxicology_mini", "How many atoms does molecule TR151 contain?", "", "",
                  Difficulty::Simple};
        c.forward_reply = R"({"columns": ["atom.atom_id"]})";
        c.sql1_reply = fenced("SELECT COUNT(atom_id) FROM atom WHERE molecule_id = 'TR151'");
        c.components_reply =
            R"({"elements": ["atom.atom_id", "atom.molecule_id"], "conditions": ["molecule id is TR151"], "keywords": ["COUNT"]})";
        c.sql2_reply = fenced("SELECT COUNT(*) FROM atom WHERE molecule_id = 'TR151'");
        c.selection_reply = "SQL2";
        c.expected_final_sql = "SELECT COUNT(*) FROM atom WHERE molecule_id = 'TR151'";
        add(std::move(c));
    }

    // 3. forward reply unusable twice: backward-only linking, and identical
    //    candidates short-circuit the selection call
    {
        FixtureCase c;
        c.task = {"e2e_2", "toxicology_mini", "List all bond types.", "", "", Difficulty::Simple};
        c.forward_reply = "I cannot help with that.";
        c.sql1_reply = fenced("SELECT DISTINCT bond_type FROM bond");
        c.components_reply = R"({"elements": ["bond.bond_type"], "conditions": [], "keywords": ["DISTINCT"]})";
        c.sql2_reply = fenced("SELECT DISTINCT bond_type FROM bond");
        c.selection_reply = "";  // must never be requested
        c.expected_final_sql = "SELECT DISTINCT bond_type FROM bond";
        add(std::move(c));
    }

    // 4. SQL3 carries a syntax error; one correction round fixes it
    {
        FixtureCase c;
        c.task = {"e2e_3", "toxicology_mini", "Which molecules are carcinogenic?", "", "",
                  Difficulty::Moderate};
        c.forward_reply = R"({"columns": ["molecule.label", "molecule.molecule_id"]})";
        c.sql1_reply = fenced("SELECT molecule_id FORM molecule WHERE label = '+'");
        c.components_reply =
            R"({"elements": ["molecule.molecule_id", "molecule.label"], "conditions": ["label is +"], "keywords": ["="]})";
        c.sql2_reply = fenced("SELECT molecule_id FORM molecule WHERE label = '+'");
        c.selection_reply = "";  // identical candidates, no selection call
        c.correction_replies = {fenced("SELECT molecule_id FROM molecule WHERE label = '+'")};
        c.expected_final_sql = "SELECT molecule_id FROM molecule WHERE label = '+'";
        add(std::move(c));
    }

    // 5. empty result no matter what: the loop must stop at exactly N rounds
    {
        FixtureCase c;
        c.task = {"e2e_4", "toxicology_mini", "List molecules with label 'zz'.", "", "",
                  Difficulty::Challenging};
        c.forward_reply = R"({"columns": ["molecule.label", "molecule.molecule_id"]})";
        c.sql1_reply = fenced("SELECT molecule_id FROM molecule WHERE label = 'zz'");
        c.components_reply =
            R"({"elements": ["molecule.molecule_id", "molecule.label"], "conditions": ["label is zz"], "keywords": ["="]})";
        c.sql2_reply = fenced("SELECT m.molecule_id FROM molecule m WHERE m.label = 'zz'");
        c.selection_reply = "SQL1";
        for (int i = 0; i < 8; ++i) {
            c.correction_replies.push_back(fenced("SELECT molecule_id FROM molecule WHERE label = 'zz'"));
        }
        c.expected_final_sql = "SELECT molecule_id FROM molecule WHERE label = 'zz'";
        add(std::move(c));
    }

    // 6. R1 errors, R2 executes: the fixture reply selects SQL2
    {
        FixtureCase c;
        c.task = {"e2e_5", "toxicology_mini", "What elements appear in molecule TR151?", "", "",
                  Difficulty::Simple};
        c.forward_reply = R"({"columns": ["atom.element", "atom.molecule_id"]})";
        c.sql1_reply = fenced("SELECT element FROM atoms WHERE molecule_id = 'TR151'");
        c.components_reply =
            R"({"elements": ["atom.element", "atom.molecule_id"], "conditions": ["molecule id is TR151"], "keywords": ["DISTINCT"]})";
        c.sql2_reply = fenced("SELECT DISTINCT element FROM atom WHERE molecule_id = 'TR151'");
        c.selection_reply = "SQL2 — the first query references a table that does not exist.";
        c.expected_final_sql = "SELECT DISTINCT element FROM atom WHERE molecule_id = 'TR151'";
        add(std::move(c));
    }

    // 7. the lowest-potential case: keywords carry MIN, SQL2 wins
    {
        FixtureCase c;
        c.task = {"e2e_6", "football_mini",
                  "What is the preferred foot when attacking of the player with the lowest potential?", "",
                  "", Difficulty::Moderate};
        c.forward_reply =
            R"({"columns": ["player_attributes.potential", "player_attributes.preferred_foot"]})";
        c.sql1_reply = fenced("SELECT preferred_foot FROM Player_Attributes ORDER BY potential ASC LIMIT 1");
        c.components_reply =
            R"({"elements": ["player_attributes.potential", "player_attributes.preferred_foot"], "conditions": ["preferred foot when attacking", "player with the lowest potential"], "keywords": ["MIN", "="]})";
        c.sql2_reply = fenced(
            "SELECT preferred_foot FROM player_attributes WHERE potential = (SELECT MIN(potential) FROM "
            "player_attributes)");
        c.selection_reply = "SQL2";
        c.expected_final_sql =
            "SELECT preferred_foot FROM player_attributes WHERE potential = (SELECT MIN(potential) FROM "
            "player_attributes)";
        add(std::move(c));
    }

    // 8. selection echoes a whole query; it maps to SQL1 by normalized equality
    {
        FixtureCase c;
        c.task = {"e2e_7", "football_mini", "How many players are there?", "", "", Difficulty::Simple};
        c.forward_reply = R"({"tables": ["player"], "columns": ["player.id"]})";
        c.sql1_reply = fenced("SELECT COUNT(*) FROM player");
        c.components_reply = R"({"elements": ["player.id"], "conditions": [], "keywords": ["COUNT"]})";
        c.sql2_reply = fenced("SELECT COUNT(id) FROM player");
        c.selection_reply = "The better query is:\n```sql\nSELECT   COUNT(*)\nFROM player\n```";
        c.expected_final_sql = "SELECT COUNT(*) FROM player";
        add(std::move(c));
    }

    // 9. selection never parses: after one re-ask the pipeline defaults to SQL1
    {
        FixtureCase c;
        c.task = {"e2e_8", "football_mini", "What is the highest potential?", "", "", Difficulty::Simple};
        c.forward_reply = R"({"columns": ["player_attributes.potential"]})";
        c.sql1_reply = fenced("SELECT MAX(potential) FROM player_attributes");
        c.components_reply =
            R"({"elements": ["player_attributes.potential"], "conditions": [], "keywords": ["MAX"]})";
        c.sql2_reply = fenced("SELECT potential FROM player_attributes ORDER BY potential DESC LIMIT 1");
        c.selection_reply = "Both candidates look reasonable to me.";
        c.expected_final_sql = "SELECT MAX(potential) FROM player_attributes";
        add(std::move(c));
    }

    // 10. hallucinated forward element is dropped and counted
    {
        FixtureCase c;
        c.task = {"e2e_9", "football_mini", "Which players have potential above 80?", "", "",
                  Difficulty::Moderate};
        c.forward_reply =
            R"({"columns": ["player_attributes.potential", "player_attributes.color", "player_attributes.player_api_id"]})";
        c.sql1_reply = fenced("SELECT player_api_id FROM player_attributes WHERE potential > 80");
        c.components_reply =
            R"({"elements": ["player_attributes.player_api_id", "player_attributes.potential"], "conditions": ["potential above 80"], "keywords": [">"]})";
        c.sql2_reply = fenced("SELECT player_api_id FROM player_attributes WHERE potential > 80");
        c.selection_reply = "";
        c.expected_final_sql = "SELECT player_api_id FROM player_attributes WHERE potential > 80";
        add(std::move(c));
    }

    // 11. components call degrades; generation proceeds on descriptions only
    {
        FixtureCase c;
        c.task = {"e2e_10", "football_mini", "List player names.", "", "", Difficulty::Simple};
        c.forward_reply = R"({"columns": ["player.player_name"]})";
        c.sql1_reply = fenced("SELECT player_name FROM player");
        c.components_reply = "I am unable to produce structured output right now.";
        c.sql2_reply = fenced("SELECT player_name FROM player");
        c.selection_reply = "";
        c.expected_final_sql = "SELECT player_name FROM player";
        add(std::move(c));
    }

    // 12. H_E naming a column outside the simplified schema is filtered out
    {
        FixtureCase c;
        c.task = {"e2e_11", "football_mini", "What is the average crossing?", "", "", Difficulty::Simple};
        c.forward_reply = R"({"columns": ["player_attributes.crossing"]})";
        c.sql1_reply = fenced("SELECT AVG(crossing) FROM player_attributes");
        c.components_reply =
            R"({"elements": ["player_attributes.crossing", "player.height"], "conditions": [], "keywords": ["AVG"]})";
        c.sql2_reply = fenced("SELECT AVG(crossing) FROM player_attributes");
        c.selection_reply = "";
        c.expected_final_sql = "SELECT AVG(crossing) FROM player_attributes";
        add(std::move(c));
    }

    return cases;
}

ScriptedBackend::Handler scripted_corpus_handler(std::vector<FixtureCase> cases) {
    return [cases = std::move(cases)](const ChatRequest& request) -> std::string {
        std::string all_user_text;
        int assistant_turns = 0;
        for (const ChatMessage& m : request.messages) {
            if (m.role == Role::User) all_user_text += m.content + "\n";
            if (m.role == Role::Assistant) ++assistant_turns;
        }

        const FixtureCase* found = nullptr;
        for (const FixtureCase& c : cases) {
            if (all_user_text.find("Question: " + c.task.question) != std::string::npos) {
                found = &c;
                break;
            }
        }
        if (found == nullptr) {
            throw std::runtime_error("scripted backend: no fixture matches request " + request.request_tag);
        }

        const std::string& tag = request.request_tag;
        if (tag == "forward_link") return found->forward_reply;
        if (tag == "preliminary_sql") return found->sql1_reply;
        if (tag == "components") return found->components_reply;
        if (tag == "simplified_sql") return found->sql2_reply;
        if (tag == "selection") {
            if (found->selection_reply.empty()) {
                throw std::runtime_error("scripted backend: unexpected selection call for " +
                                         found->task.question_id);
            }
            return found->selection_reply;
        }
        if (tag == "correction") {
            std::size_t round = static_cast<std::size_t>(assistant_turns);
            if (round < found->correction_replies.size()) return found->correction_replies[round];
            throw std::runtime_error("scripted backend: unexpected correction round for " +
                                     found->task.question_id);
        }
        throw std::runtime_error("scripted backend: unknown tag " + tag);
    };
}

DatabaseContext make_db_context(const std::filesystem::path& db_path, unsigned sample_seed,
                                int rows_per_table, int max_cell_len) {
    DatabaseContext context;
    context.db_path = db_path;
    context.catalog = DatabaseCatalog::introspect(db_path);
    context.samples = sample_values(context.catalog, db_path, rows_per_table, sample_seed, max_cell_len);
    return context;
}

std::string normalize_ws(const std::string& sql) {
    std::string out;
    bool in_space = false;
    for (char c : sql) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            if (!in_space && !out.empty()) out.push_back(' ');
            in_space = true;
            continue;
        }
        in_space = false;
        out.push_back(c);
    }
    while (!out.empty() && (out.back() == ' ' || out.back() == ';')) out.pop_back();
    return out;
}

}  // namespace sqlink::testing
