#include <doctest.h>

#include <random>

#include "psynth/error.hpp"
#include "psynth/schema.hpp"
#include "support.hpp"

using namespace psynth;

TEST_CASE("bundled default schema has the five published attribute domains") {
    const auto& s = default_schema();
    REQUIRE(s.attribute_count() == 5);
    const std::vector<std::string> names = {"Age Group", "Education Level", "Main Activity",
                                            "Economic Status", "Household Type"};
    const std::vector<std::size_t> sizes = {9, 4, 8, 5, 11};
    for (std::size_t a = 0; a < 5; ++a) {
        CHECK(s.attribute(a).name == names[a]);
        CHECK(s.attribute(a).size() == sizes[a]);
    }
    CHECK(s.attribute(0).categories[0] == "14--17");
    CHECK(s.attribute(0).categories[1] == "18--29");
    CHECK(s.attribute(0).categories[2] == "30--39");
    CHECK(persona_space_size(s) == 15840);
}

TEST_CASE("walking question ships with the five-option agreement scale") {
    const auto& q = default_schema().question("walking");
    CHECK(q.responses == std::vector<std::string>{"Completely Agree", "Rather Agree", "Partly Agree",
                                                  "Rather Disagree", "Completely Disagree"});
    CHECK(q.group_attribute == "Age Group");
}

TEST_CASE("minimal one-attribute schema") {
    const auto s = load_schema_text(R"({"attributes":[{"name":"X","categories":["a","b"]}]})");
    CHECK(s.attribute_count() == 1);
    CHECK(s.attribute(0).size() == 2);
    CHECK(persona_space_size(s) == 2);
}

TEST_CASE("schema validation errors") {
    CHECK_THROWS_AS(load_schema_text(R"({"attributes":[{"name":"X","categories":["a"]},
                                                      {"name":"X","categories":["b"]}]})"),
                    SchemaError);
    CHECK_THROWS_AS(load_schema_text(R"({"attributes":[{"name":"X","categories":[]}]})"), SchemaError);
    CHECK_THROWS_AS(load_schema_text(R"({"attributes":[{"name":"X","categories":["a","a"]}]})"),
                    SchemaError);
    CHECK_THROWS_AS(load_schema_text(R"({"attributes":[]})"), SchemaError);
    CHECK_THROWS_AS(load_schema_text("not json"), SchemaError);
    CHECK_THROWS_AS(load_schema_text(R"({"attributes":[{"name":"X","categories":["a"]}],
        "questions":[{"id":"q","responses":["yes"],"group_attribute":"X"}]})"),
                    SchemaError);
    CHECK_THROWS_AS(load_schema_text(R"({"attributes":[{"name":"X","categories":["a"]}],
        "questions":[{"id":"q","responses":["yes","no"],"group_attribute":"Y"}]})"),
                    SchemaError);
    CHECK_THROWS_AS(load_schema_file("/nonexistent/schema.json"), SchemaError);
}

TEST_CASE("labels match case-sensitively") {
    const auto& age = default_schema().attribute(0);
    CHECK(age.find("14--17").has_value());
    CHECK_FALSE(default_schema().find_attribute("age group").has_value());
}

TEST_CASE("persona_space_size small cases") {
    CHECK(persona_space_size(testsupport::schema_with_sizes({2, 2})) == 4);
    CHECK(persona_space_size(testsupport::schema_with_sizes({3})) == 3);
}

TEST_CASE("property: persona_space_size is the product of category counts") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> attrs(1, 7), cats(1, 9);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::size_t> sizes(attrs(rng));
        std::uint64_t product = 1;
        for (auto& k : sizes) {
            k = cats(rng);
            product *= k;
        }
        CHECK(persona_space_size(testsupport::schema_with_sizes(sizes)) == product);
    }
}

TEST_CASE("property: load, serialize, load round-trips") {
    const auto& s = default_schema();
    CHECK(load_schema(serialize_schema(s)) == s);

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto sizes = testsupport::random_sizes(rng, 5, 500);
        const auto q = testsupport::question("q" + std::to_string(trial), 2 + trial % 4, "attr0");
        const auto schema = testsupport::schema_with_sizes(sizes, {q});
        const auto again = load_schema_text(serialize_schema(schema).dump());
        CHECK(again == schema);
        CHECK(serialize_schema(again) == serialize_schema(schema));
    }
}
