// sitegen.hpp
// Population generator. Turns a PopulationConfig + seed into a complete
// ground-truth ledger: attributes, lifetimes, markers, links, relevance.

#pragma once

#include <vector>

#include "scrapelab/unit.hpp"

namespace scrapelab::sitegen {

// Full pipeline. Deterministic: identical config (seed included) yields a
// byte-identical ledger on disk.
GroundTruthLedger generate_population(const PopulationConfig& config);

// Applies marker rules plus the bestseller marker (top `bestseller_size`
// units by the "views" attribute, ties broken by ascending id). Exposed
// separately so rule behavior is testable in isolation.
void assign_markers(std::vector<GroundTruthUnit>& units,
                    const std::vector<MarkerRule>& rules,
                    std::size_t bestseller_size);

// Nearest-neighbor link graph on standardized attributes. Distance ties are
// broken by ascending id; self-links never occur.
void build_link_graph(std::vector<GroundTruthUnit>& units, const LinkRule& rule);

// Recomputes each unit's removal intensity from the ledger's own config and
// attribute values. This is the closed-form counterpart of the sampled
// lifetimes and is what survivorship expectations are checked against.
std::vector<double> unit_hazards(const GroundTruthLedger& ledger);

}  // namespace scrapelab::sitegen
