#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "sqlink/errors.hpp"
#include "sqlink/schema_catalog.hpp"

using namespace sqlink;
using sqlink::testing::TempDir;

namespace {

bool mentions_word(const std::string& text, const std::string& word) {
    std::size_t pos = 0;
    while ((pos = text.find(word, pos)) != std::string::npos) {
        bool left = pos == 0 || !(std::isalnum(static_cast<unsigned char>(text[pos - 1])) || text[pos - 1] == '_');
        std::size_t end = pos + word.size();
        bool right = end == text.size() || !(std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '_');
        if (left && right) return true;
        ++pos;
    }
    return false;
}

}  // namespace

TEST_CASE("introspect reads tables, columns, primary keys and foreign keys") {
    TempDir tmp;
    auto db = tmp.path() / "tox.sqlite";
    sqlink::testing::make_toxicology_db(db);

    DatabaseCatalog catalog = DatabaseCatalog::introspect(db);
    REQUIRE(catalog.table_count() == 3);
    CHECK(catalog.tables()[0].name == "molecule");
    CHECK(catalog.tables()[1].name == "atom");
    CHECK(catalog.tables()[2].name == "bond");

    const TableInfo* molecule = catalog.find_table("molecule");
    REQUIRE(molecule != nullptr);
    REQUIRE(molecule->columns.size() == 2);
    CHECK(molecule->columns[0].name == "molecule_id");
    CHECK(molecule->columns[0].is_primary_key);
    CHECK(molecule->columns[1].name == "label");
    CHECK_FALSE(molecule->columns[1].is_primary_key);

    REQUIRE(catalog.foreign_keys().size() == 2);
    bool atom_fk = false;
    for (const ForeignKey& fk : catalog.foreign_keys()) {
        if (fk.from_table == "atom") {
            atom_fk = true;
            CHECK(fk.from_column == "molecule_id");
            CHECK(fk.to_table == "molecule");
            CHECK(fk.to_column == "molecule_id");
        }
    }
    CHECK(atom_fk);
}

TEST_CASE("introspect is idempotent") {
    TempDir tmp;
    auto db = tmp.path() / "tox.sqlite";
    sqlink::testing::make_toxicology_db(db);
    CHECK(DatabaseCatalog::introspect(db) == DatabaseCatalog::introspect(db));
}

TEST_CASE("introspect error paths") {
    TempDir tmp;

    SUBCASE("missing file") {
        try {
            DatabaseCatalog::introspect(tmp.path() / "nope.sqlite");
            FAIL("expected FileNotFound");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::FileNotFound);
        }
    }
    SUBCASE("empty database") {
        auto db = tmp.path() / "empty.sqlite";
        sqlink::testing::exec_ddl(db, {"PRAGMA user_version = 1"});
        try {
            DatabaseCatalog::introspect(db);
            FAIL("expected EmptySchema");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EmptySchema);
        }
    }
    SUBCASE("not a database") {
        auto db = tmp.path() / "garbage.sqlite";
        std::ofstream(db) << "this is definitely not a sqlite file, padded to be long enough "
                          << std::string(200, 'x');
        try {
            DatabaseCatalog::introspect(db);
            FAIL("expected NotADatabase");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NotADatabase);
        }
    }
}

TEST_CASE("catalog keeps BIRD-style attribute columns visible") {
    TempDir tmp;
    auto db = tmp.path() / "football.sqlite";
    sqlink::testing::make_football_db(db);
    DatabaseCatalog catalog = DatabaseCatalog::introspect(db);
    CHECK(catalog.find_column("player_attributes", "potential") != nullptr);
    CHECK(catalog.find_column("player_attributes", "preferred_foot") != nullptr);
    // lookups are case-insensitive, original casing is preserved
    CHECK(catalog.find_column("Player_Attributes", "Potential") != nullptr);
}

TEST_CASE("catalog invariants are enforced") {
    std::vector<TableInfo> tables{{"t", {{"a", "INT", true}, {"A", "INT", false}}}};
    CHECK_THROWS_AS(DatabaseCatalog("x", tables, {}), Error);

    std::vector<TableInfo> ok{{"t", {{"a", "INT", true}}}};
    CHECK_THROWS_AS(DatabaseCatalog("x", ok, {{"t", "a", "missing", "b"}}), Error);
}

TEST_CASE("sample_values is deterministic and truncates long cells") {
    TempDir tmp;
    auto db = tmp.path() / "s.sqlite";
    sqlink::testing::exec_ddl(db, {
        "CREATE TABLE t (id INTEGER PRIMARY KEY, txt TEXT)",
        "CREATE TABLE empty_t (id INTEGER PRIMARY KEY)",
        "INSERT INTO t VALUES (1, '" + std::string(500, 'a') + "'), (2, 'short'), (3, 'mid'), (4, 'x')",
    });
    DatabaseCatalog catalog = DatabaseCatalog::introspect(db);

    ValueSamples a = sample_values(catalog, db, 3, 7, 64);
    ValueSamples b = sample_values(catalog, db, 3, 7, 64);
    REQUIRE(a.tables.size() == 2);
    CHECK(a.tables[0].rows.size() == 3);
    CHECK(a.tables[1].rows.empty());  // empty table gives an empty sample list
    CHECK(a.tables == b.tables ? true : false);

    bool saw_truncated = false;
    for (const auto& row : a.tables[0].rows) {
        for (const auto& cell : row) {
            if (cell.size() == 64 + 3) {
                CHECK(cell.substr(64) == "...");
                saw_truncated = true;
            }
            CHECK(cell.size() <= 64 + 3);
        }
    }
    CHECK(saw_truncated);

    ValueSamples c = sample_values(catalog, db, 3, 8, 64);
    (void)c;  // different seed must not throw; contents may differ
}

TEST_CASE("load_descriptions reads BIRD CSVs with BOM and extras") {
    TempDir tmp;
    auto db = tmp.path() / "tox.sqlite";
    sqlink::testing::make_toxicology_db(db);
    DatabaseCatalog catalog = DatabaseCatalog::introspect(db);

    auto desc_dir = tmp.path() / "database_description";
    std::filesystem::create_directories(desc_dir);
    {
        std::ofstream csv(desc_dir / "molecule.csv", std::ios::binary);
        csv << "\xEF\xBB\xBF" << "original_column_name,column_name,column_description,data_format,value_description\n";
        csv << "molecule_id,molecule id,unique molecule identifier,text,\n";
        csv << "label,label,\"whether the molecule is carcinogenic\",text,\"'+' means carcinogenic\"\n";
        csv << "ghost_column,ghost,should be dropped,text,\n";
    }

    SchemaDescriptions desc = load_descriptions(catalog, desc_dir);
    const std::string* label = desc.column_description("molecule", "label");
    REQUIRE(label != nullptr);
    CHECK(label->find("whether the molecule is carcinogenic") != std::string::npos);
    CHECK(label->find("'+' means carcinogenic") != std::string::npos);
    CHECK(desc.column_description("molecule", "ghost_column") == nullptr);
    REQUIRE(desc.warnings.size() == 1);
    CHECK(desc.warnings[0].find("ghost_column") != std::string::npos);

    SUBCASE("missing directory yields empty descriptions without error") {
        SchemaDescriptions none = load_descriptions(catalog, tmp.path() / "no_such_dir");
        CHECK(none.empty());
    }
    SUBCASE("header without original_column_name is malformed") {
        std::ofstream bad(desc_dir / "atom.csv");
        bad << "col,desc\natom_id,something\n";
        bad.close();
        try {
            load_descriptions(catalog, desc_dir);
            FAIL("expected MalformedDescriptionFile");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::MalformedDescriptionFile);
        }
    }
}

TEST_CASE("descriptions_from_map filters to the catalog") {
    TempDir tmp;
    auto db = tmp.path() / "tox.sqlite";
    sqlink::testing::make_toxicology_db(db);
    DatabaseCatalog catalog = DatabaseCatalog::introspect(db);

    SchemaDescriptions desc = descriptions_from_map(
        catalog, {{{"molecule", "label"}, "carcinogenicity flag"}, {{"molecule", "color"}, "nope"}});
    CHECK(desc.column_description("molecule", "label") != nullptr);
    CHECK(desc.column_description("molecule", "color") == nullptr);
    CHECK(desc.warnings.size() == 1);
}

TEST_CASE("render_schema_prompt honors subsets exactly") {
    TempDir tmp;
    auto db = tmp.path() / "tox.sqlite";
    sqlink::testing::make_toxicology_db(db);
    DatabaseCatalog catalog = DatabaseCatalog::introspect(db);
    ValueSamples samples = sample_values(catalog, db, 2, 3, 64);

    std::string full = render_schema_prompt(catalog, samples);

    SUBCASE("identity subset renders identically") {
        SchemaSet all = catalog.full_schema_set();
        CHECK(render_schema_prompt(catalog, samples, nullptr, &all) == full);
    }
    SUBCASE("excluded table leaves no trace") {
        SchemaSet subset;
        subset.add_column("molecule", "label");
        subset.add_column("molecule", "molecule_id");
        subset.add_column("bond", "bond_id");
        std::string text = render_schema_prompt(catalog, samples, nullptr, &subset);
        CHECK(text.find("Table: atom") == std::string::npos);
        CHECK_FALSE(mentions_word(text, "atom"));
        CHECK(text.find("Table: molecule") != std::string::npos);
        // the atom->molecule FK must be gone, the bond->molecule one also
        // references an unretained column set but still joins retained tables
        CHECK(text.find("atom.molecule_id") == std::string::npos);
    }
    SUBCASE("mentioned columns equal the subset") {
        SchemaSet subset;
        subset.add_column("molecule", "label");
        subset.add_column("atom", "element");
        std::string text = render_schema_prompt(catalog, samples, nullptr, &subset);
        CHECK(mentions_word(text, "label"));
        CHECK(mentions_word(text, "element"));
        CHECK_FALSE(mentions_word(text, "atom_id"));
        CHECK_FALSE(mentions_word(text, "bond_type"));
        CHECK_FALSE(mentions_word(text, "bond"));
    }
    SUBCASE("descriptions appear only when provided") {
        CHECK(full.find("Description:") == std::string::npos);
        CHECK(full.find(": ") == std::string::npos);  // no description suffix on columns

        SchemaDescriptions desc = descriptions_from_map(catalog, {{{"molecule", "label"}, "class flag"}});
        std::string with = render_schema_prompt(catalog, samples, &desc);
        CHECK(with.find("class flag") != std::string::npos);
    }
    SUBCASE("unknown subset element is an error") {
        SchemaSet subset;
        subset.add_column("molecule", "color");
        try {
            render_schema_prompt(catalog, samples, nullptr, &subset);
            FAIL("expected UnknownSchemaElement");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::UnknownSchemaElement);
        }
    }
}

TEST_CASE("render blocks for samples and descriptions") {
    TempDir tmp;
    auto db = tmp.path() / "tox.sqlite";
    sqlink::testing::make_toxicology_db(db);
    DatabaseCatalog catalog = DatabaseCatalog::introspect(db);
    ValueSamples samples = sample_values(catalog, db, 2, 3, 64);

    std::string block = render_samples_block(catalog, samples);
    CHECK(block.find("molecule (") != std::string::npos);

    SchemaDescriptions desc = descriptions_from_map(catalog, {{{"molecule", "label"}, "class flag"}});
    std::string dblock = render_descriptions_block(catalog, desc);
    CHECK(dblock == "molecule.label: class flag\n");
}
