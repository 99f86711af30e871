#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace psynth {

struct Attribute {
    std::string name;
    std::vector<std::string> categories;

    std::size_t size() const noexcept { return categories.size(); }
    /// Exact, case-sensitive lookup.
    std::optional<std::size_t> find(std::string_view label) const;

    bool operator==(const Attribute&) const = default;
};

struct Question {
    std::string id;
    std::string text;
    std::vector<std::string> responses;
    std::string group_attribute = "Age Group";
    /// Strength of the monotone trend the deterministic backend applies along the
    /// group attribute's category order. 0 disables it.
    double trend = 0.0;

    std::size_t size() const noexcept { return responses.size(); }
    std::optional<std::size_t> find(std::string_view label) const;

    bool operator==(const Question&) const = default;
};

/// Ordered attribute domains plus the survey questions asked over them.
/// Immutable once loaded; share freely across threads.
class AttributeSchema {
public:
    AttributeSchema() = default;
    /// Validates on construction; throws SchemaError.
    AttributeSchema(std::vector<Attribute> attributes, std::vector<Question> questions = {});

    const std::vector<Attribute>& attributes() const noexcept { return attributes_; }
    const std::vector<Question>& questions() const noexcept { return questions_; }

    std::size_t attribute_count() const noexcept { return attributes_.size(); }
    const Attribute& attribute(std::size_t i) const { return attributes_.at(i); }

    std::optional<std::size_t> find_attribute(std::string_view name) const;
    /// Throws SchemaError when absent.
    std::size_t attribute_index(std::string_view name) const;

    const Question* find_question(std::string_view id) const;
    const Question& question(std::string_view id) const;

    /// Category counts in attribute order.
    std::vector<std::size_t> radices() const;

    bool operator==(const AttributeSchema&) const = default;

private:
    std::vector<Attribute> attributes_;
    std::vector<Question> questions_;
};

/// Parses a schema document:
///
///     { "attributes": [ {"name": ..., "categories": [...]}, ... ],
///       "questions":  [ {"id": ..., "text": ..., "responses": [...],
///                        "group_attribute": ..., "trend": ...}, ... ] }
///
/// `questions`, `group_attribute` (default "Age Group") and `trend` (default 0) are optional.
AttributeSchema load_schema(const nlohmann::json& doc);
AttributeSchema load_schema_text(std::string_view text);
AttributeSchema load_schema_file(const std::string& path);

nlohmann::json serialize_schema(const AttributeSchema& schema);

/// The bundled default: five attributes with 9, 4, 8, 5 and 11 categories and the walking question.
const AttributeSchema& default_schema();

/// Product of category counts.
std::uint64_t persona_space_size(const AttributeSchema& schema);

} // namespace psynth
