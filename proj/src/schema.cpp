#include "psynth/schema.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "psynth/bundled.hpp"
#include "psynth/error.hpp"

namespace psynth {

namespace {

template <typename Range>
void require_unique(const Range& labels, const std::string& what) {
    std::unordered_set<std::string_view> seen;
    for (const auto& label : labels) {
        if (!seen.insert(label).second) {
            throw SchemaError("duplicate " + what + " '" + std::string(label) + "'");
        }
    }
}

std::vector<std::string> string_list(const nlohmann::json& node, const std::string& context) {
    if (!node.is_array()) {
        throw SchemaError(context + " must be a list");
    }
    std::vector<std::string> out;
    out.reserve(node.size());
    for (const auto& item : node) {
        if (!item.is_string()) {
            throw SchemaError(context + " entries must be strings");
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

} // namespace

std::optional<std::size_t> Attribute::find(std::string_view label) const {
    for (std::size_t i = 0; i < categories.size(); ++i) {
        if (categories[i] == label) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> Question::find(std::string_view label) const {
    for (std::size_t i = 0; i < responses.size(); ++i) {
        if (responses[i] == label) {
            return i;
        }
    }
    return std::nullopt;
}

AttributeSchema::AttributeSchema(std::vector<Attribute> attributes, std::vector<Question> questions)
    : attributes_(std::move(attributes)), questions_(std::move(questions)) {
    if (attributes_.empty()) {
        throw SchemaError("schema has no attributes");
    }
    std::vector<std::string_view> names;
    for (const auto& attr : attributes_) {
        if (attr.name.empty()) {
            throw SchemaError("attribute with empty name");
        }
        if (attr.categories.empty()) {
            throw SchemaError("attribute '" + attr.name + "' has no categories");
        }
        require_unique(attr.categories, "category in attribute '" + attr.name + "'");
        names.push_back(attr.name);
    }
    require_unique(names, "attribute");

    std::vector<std::string_view> ids;
    for (const auto& q : questions_) {
        if (q.id.empty()) {
            throw SchemaError("question with empty id");
        }
        if (q.responses.size() < 2) {
            throw SchemaError("question '" + q.id + "' needs at least 2 response options");
        }
        require_unique(q.responses, "response in question '" + q.id + "'");
        if (!find_attribute(q.group_attribute)) {
            throw SchemaError("question '" + q.id + "' groups by unknown attribute '" +
                              q.group_attribute + "'");
        }
        ids.push_back(q.id);
    }
    require_unique(ids, "question");
}

std::optional<std::size_t> AttributeSchema::find_attribute(std::string_view name) const {
    for (std::size_t i = 0; i < attributes_.size(); ++i) {
        if (attributes_[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t AttributeSchema::attribute_index(std::string_view name) const {
    if (auto idx = find_attribute(name)) {
        return *idx;
    }
    throw SchemaError("unknown attribute '" + std::string(name) + "'");
}

const Question* AttributeSchema::find_question(std::string_view id) const {
    for (const auto& q : questions_) {
        if (q.id == id) {
            return &q;
        }
    }
    return nullptr;
}

const Question& AttributeSchema::question(std::string_view id) const {
    if (const auto* q = find_question(id)) {
        return *q;
    }
    throw SchemaError("unknown question '" + std::string(id) + "'");
}

std::vector<std::size_t> AttributeSchema::radices() const {
    std::vector<std::size_t> out;
    out.reserve(attributes_.size());
    for (const auto& attr : attributes_) {
        out.push_back(attr.size());
    }
    return out;
}

AttributeSchema load_schema(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("attributes")) {
        throw SchemaError("schema document needs an 'attributes' list");
    }
    std::vector<Attribute> attributes;
    for (const auto& node : doc.at("attributes")) {
        if (!node.is_object() || !node.contains("name") || !node.contains("categories")) {
            throw SchemaError("attribute entries need 'name' and 'categories'");
        }
        Attribute attr;
        attr.name = node.at("name").get<std::string>();
        attr.categories = string_list(node.at("categories"), "categories of '" + attr.name + "'");
        attributes.push_back(std::move(attr));
    }

    std::vector<Question> questions;
    if (doc.contains("questions")) {
        for (const auto& node : doc.at("questions")) {
            if (!node.is_object() || !node.contains("id") || !node.contains("responses")) {
                throw SchemaError("question entries need 'id' and 'responses'");
            }
            Question q;
            q.id = node.at("id").get<std::string>();
            q.text = node.value("text", q.id);
            q.responses = string_list(node.at("responses"), "responses of '" + q.id + "'");
            q.group_attribute = node.value("group_attribute", q.group_attribute);
            q.trend = node.value("trend", 0.0);
            questions.push_back(std::move(q));
        }
    }
    return AttributeSchema(std::move(attributes), std::move(questions));
}

AttributeSchema load_schema_text(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed schema document: ") + e.what());
    }
    try {
        return load_schema(doc);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed schema document: ") + e.what());
    }
}

AttributeSchema load_schema_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SchemaError("cannot open schema file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_schema_text(buf.str());
}

nlohmann::json serialize_schema(const AttributeSchema& schema) {
    nlohmann::json doc;
    doc["attributes"] = nlohmann::json::array();
    for (const auto& attr : schema.attributes()) {
        doc["attributes"].push_back({{"name", attr.name}, {"categories", attr.categories}});
    }
    doc["questions"] = nlohmann::json::array();
    for (const auto& q : schema.questions()) {
        doc["questions"].push_back({{"id", q.id},
                                    {"text", q.text},
                                    {"responses", q.responses},
                                    {"group_attribute", q.group_attribute},
                                    {"trend", q.trend}});
    }
    return doc;
}

const AttributeSchema& default_schema() {
    static const AttributeSchema schema = load_schema_text(bundled::default_schema_json());
    return schema;
}

std::uint64_t persona_space_size(const AttributeSchema& schema) {
    std::uint64_t n = 1;
    for (const auto& attr : schema.attributes()) {
        n *= attr.size();
    }
    return n;
}

} // namespace psynth
