#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cbench/errors.hpp"
#include "cbench/graph.hpp"
#include "cbench/rng.hpp"

namespace cbench {

enum class NameStyleKind { random_only, plain_term, change_term };

// How display names are built: a bare random token, "token term", or
// "indicator token term". Terms come from a subject lexicon, so the
// surrounding words are familiar while the named phenomenon is not.
struct NameStyle {
    NameStyleKind kind = NameStyleKind::random_only;
    std::string subject;

    void validate(const std::set<std::string>& known_subjects) const {
        if (kind == NameStyleKind::random_only) {
            if (!subject.empty())
                throw ValidationError("random name style takes no subject");
        } else if (!known_subjects.count(subject)) {
            throw ValidationError("unknown lexicon subject '" + subject + "'");
        }
    }

    std::string tag() const {
        switch (kind) {
            case NameStyleKind::random_only: return "random";
            case NameStyleKind::plain_term: return "plain:" + subject;
            case NameStyleKind::change_term: return "change:" + subject;
        }
        return {};
    }

    static NameStyle parse(std::string_view text) {
        NameStyle s;
        auto colon = text.find(':');
        std::string_view kind = text.substr(0, colon);
        if (kind == "random") {
            s.kind = NameStyleKind::random_only;
        } else if (kind == "plain") {
            s.kind = NameStyleKind::plain_term;
        } else if (kind == "change") {
            s.kind = NameStyleKind::change_term;
        } else {
            throw ValidationError("unknown name style '" + std::string(text) + "'");
        }
        if (colon != std::string_view::npos) s.subject = std::string(text.substr(colon + 1));
        if (s.kind != NameStyleKind::random_only && s.subject.empty())
            throw ValidationError("name style '" + std::string(text) + "' needs a subject");
        return s;
    }

    bool operator==(const NameStyle&) const = default;
};

// Subject term lists plus change indicators. File format: one entry per
// line, grouped under section headers like [biology]; indicators live under
// [indicators]; '#' starts a comment.
struct TermLexicon {
    std::map<std::string, std::vector<std::string>> subjects;
    std::vector<std::string> change_indicators;

    void validate() const {
        if (subjects.empty()) throw ValidationError("lexicon has no subjects");
        for (auto& [subject, terms] : subjects) {
            if (terms.empty())
                throw ValidationError("lexicon subject '" + subject + "' has no terms");
            for (auto& t : terms)
                for (char c : t)
                    if (c >= 'A' && c <= 'Z')
                        throw ValidationError("lexicon terms must be lowercase: '" + t + "'");
        }
        if (change_indicators.empty()) throw ValidationError("lexicon has no change indicators");
    }

    std::set<std::string> subject_names() const {
        std::set<std::string> out;
        for (auto& [s, _] : subjects) out.insert(s);
        return out;
    }

    static TermLexicon parse(std::string_view text) {
        TermLexicon lex;
        std::string section;
        size_t line_no = 0;
        size_t start = 0;
        while (start <= text.size()) {
            size_t nl = text.find('\n', start);
            size_t end = nl == std::string_view::npos ? text.size() : nl;
            std::string line(text.substr(start, end - start));
            ++line_no;
            if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
            while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
            size_t first = line.find_first_not_of(' ');
            if (first != std::string::npos) {
                line = line.substr(first);
                if (line.front() == '[') {
                    if (line.back() != ']')
                        throw ParseError("lexicon line " + std::to_string(line_no) +
                                         ": unterminated section header");
                    section = line.substr(1, line.size() - 2);
                } else if (section.empty()) {
                    throw ParseError("lexicon line " + std::to_string(line_no) +
                                     ": entry before any section header");
                } else if (section == "indicators") {
                    lex.change_indicators.push_back(line);
                } else {
                    lex.subjects[section].push_back(line);
                }
            }
            if (nl == std::string_view::npos) break;
            start = nl + 1;
        }
        lex.validate();
        return lex;
    }

    static const TermLexicon& builtin();
};

// Lowercase token of 8..11 letters, e.g. "thepxexqaac"-shaped. Uniqueness
// is the caller's concern; assign_names filters duplicates.
inline std::string random_token(Rng& stream, int min_len = 8, int max_len = 11) {
    int len = min_len + static_cast<int>(stream.uniform(
                            static_cast<uint64_t>(max_len - min_len + 1)));
    std::string out;
    out.reserve(static_cast<size_t>(len));
    for (int i = 0; i < len; ++i)
        out += static_cast<char>('a' + stream.uniform(26));
    return out;
}

// Pairwise-distinct display names for every node. Deterministic in
// (graph, style, seed); draws come from Rng(seed).child("names").child(tag).
// Terms are used at most once per scenario, so the pool must cover the
// node count.
inline std::map<int, std::string> assign_names(const TieredDag& g, const NameStyle& style,
                                               const TermLexicon& lex, uint64_t seed) {
    style.validate(lex.subject_names());
    const int n = g.node_count();

    std::vector<std::string> term_pool;
    if (style.kind != NameStyleKind::random_only) {
        term_pool = lex.subjects.at(style.subject);
        if (static_cast<int>(term_pool.size()) < n)
            throw ValidationError("lexicon subject '" + style.subject + "' has " +
                                  std::to_string(term_pool.size()) + " terms but the graph has " +
                                  std::to_string(n) + " nodes");
    }

    Rng r = Rng(seed).child("names").child(style.tag());
    std::map<int, std::string> names;
    std::set<std::string> used_tokens;
    std::set<std::string> used_names;
    size_t pool_left = term_pool.size();
    for (int v = 0; v < n; ++v) {
        std::string name;
        do {
            std::string token = random_token(r);
            while (!used_tokens.insert(token).second) token = random_token(r);
            switch (style.kind) {
                case NameStyleKind::random_only: name = token; break;
                case NameStyleKind::plain_term: {
                    size_t i = static_cast<size_t>(r.uniform(pool_left));
                    name = token + " " + term_pool[i];
                    std::swap(term_pool[i], term_pool[--pool_left]);
                    break;
                }
                case NameStyleKind::change_term: {
                    size_t i = static_cast<size_t>(r.uniform(pool_left));
                    const std::string& ind = lex.change_indicators[static_cast<size_t>(
                        r.uniform(lex.change_indicators.size()))];
                    name = ind + " " + token + " " + term_pool[i];
                    std::swap(term_pool[i], term_pool[--pool_left]);
                    break;
                }
            }
        } while (!used_names.insert(name).second);
        names[v] = name;
    }
    return names;
}

inline const TermLexicon& TermLexicon::builtin() {
    static const TermLexicon lex = TermLexicon::parse(R"lex(
# Default subject lexicon: ~30 terms per subject plus change indicators.

[indicators]
increase of
decrease of

[biology]
virus
enzyme
protein
mutation
bacteria
membrane
neuron
hormone
antibody
chromosome
metabolism
photosynthesis
mitosis
receptor
ribosome
plasmid
pathogen
organism
tissue
gene
allele
phenotype
genome
synapse
cytoplasm
vesicle
peptide
microbe
spore
toxin

[chemistry]
decomposition
oxidation
reduction
catalyst
solvent
polymer
isotope
titration
precipitate
electrolyte
combustion
distillation
molecule
compound
reagent
crystallization
sublimation
hydrolysis
ionization
corrosion
diffusion
evaporation
solution
acidity
alloy
monomer
synthesis
adsorption
electrolysis
fermentation

[economics]
inflation
tariff
subsidy
deficit
revenue
investment
unemployment
demand
supply
recession
liquidity
dividend
monopoly
arbitrage
depreciation
export
import
taxation
commodity
equity
austerity
stagnation
deflation
surplus
wage
credit
debt
consumption
productivity
speculation

[physics]
radiation
momentum
entropy
friction
resonance
refraction
diffraction
capacitance
inductance
turbulence
oscillation
polarization
superconductivity
magnetism
gravitation
acceleration
interference
luminosity
viscosity
fission
fusion
plasma
torque
impedance
conductivity
elasticity
decay
absorption
scattering
dispersion
)lex");
    return lex;
}

} // namespace cbench
