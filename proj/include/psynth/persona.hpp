#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "psynth/kernels.hpp"
#include "psynth/schema.hpp"

namespace psynth {

using kernels::Exec;

/// One category index per schema attribute, in schema order.
struct Persona {
    std::vector<std::size_t> categories;

    bool operator==(const Persona&) const = default;
};

/// The full persona partition of a schema with one density per persona.
/// Personas are stored implicitly in lexicographic order of their category tuples.
class PersonaTable {
public:
    PersonaTable() = default;
    /// Takes ownership of densities; their count must match the layout size.
    PersonaTable(kernels::Layout layout, std::vector<double> density);

    const kernels::Layout& layout() const noexcept { return layout_; }
    std::size_t size() const noexcept { return density_.size(); }

    double density(std::size_t i) const { return density_[i]; }
    std::span<const double> densities() const noexcept { return density_; }
    std::span<double> densities() noexcept { return density_; }

    Persona persona(std::size_t i) const { return {layout_.decode(i)}; }
    std::size_t index_of(const Persona& p) const { return layout_.encode(p.categories); }
    std::size_t category(std::size_t i, std::size_t attr) const { return layout_.category(i, attr); }

    bool operator==(const PersonaTable&) const = default;

private:
    kernels::Layout layout_;
    std::vector<double> density_;
};

/// Conditional factors of the density chain, one per attribute in schema order.
/// Factor k maps a category tuple of attributes 0..k-1 to a distribution over
/// attribute k. Entries may be omitted for prefixes that carry zero probability.
class ConditionalTable {
public:
    explicit ConditionalTable(std::vector<std::size_t> radices);

    std::size_t factor_count() const noexcept { return radices_.size(); }
    const std::vector<std::size_t>& radices() const noexcept { return radices_; }

    /// Throws PersonaError on a bad prefix, wrong length, a negative entry or a
    /// sum that is not 1 within 1e-9.
    void set(std::size_t factor, std::span<const std::size_t> prefix, std::vector<double> probs);

    /// nullptr when the entry is absent.
    const std::vector<double>* find(std::size_t factor, std::span<const std::size_t> prefix) const;
    const std::vector<double>* find_code(std::size_t factor, std::uint64_t prefix_code) const;

    /// Factor k ignores the prefix and returns marginals[k].
    static ConditionalTable independent(const std::vector<std::vector<double>>& marginals);

private:
    std::uint64_t prefix_code(std::size_t factor, std::span<const std::size_t> prefix) const;

    std::vector<std::size_t> radices_;
    std::vector<std::unordered_map<std::uint64_t, std::vector<double>>> factors_;
};

/// All personas of the schema, uniform density 1/N.
PersonaTable enumerate_personas(const AttributeSchema& schema);

/// Densities as the product of chain factors per persona, renormalized once to absorb
/// rounding. The input table supplies the persona grid; its densities are ignored.
/// Throws PersonaError when an entry is missing for a prefix with positive probability.
PersonaTable density_from_conditionals(const PersonaTable& table, const ConditionalTable& cond,
                                       Exec exec = Exec::parallel);

/// Delimited export: header of attribute names plus `density`, one row per persona
/// with category labels. Densities are printed in shortest round-trip form.
std::string export_persona_table(const PersonaTable& table, const AttributeSchema& schema);
PersonaTable import_persona_table(std::string_view text, const AttributeSchema& schema);

} // namespace psynth
