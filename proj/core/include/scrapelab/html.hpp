// html.hpp
// Unit page and listing markup. The renderer and the page parser agree on
// these hooks; everything else in a page is decorative and may change.

#pragma once

#include <string>
#include <vector>

#include "scrapelab/unit.hpp"

namespace scrapelab::webserve {

// Stable machine-readable hooks in rendered pages:
//   <article class="unit" data-unit-id="..." data-created-at="...">
//   <dd data-attr="NAME" data-value="VALUE">          numeric attributes
//   <li class="marker">KEYWORD</li>                   markers
//   <a class="similar-link" href="/unit/ID">          outgoing links
//   <a class="unit-link" href="/unit/ID">             listing entries
// Attribute values use shortest-round-trip formatting, so a parse recovers
// the ledger doubles exactly.

std::string render_unit_page(const GroundTruthUnit& unit);

std::string render_listing_page(const std::string& title,
                                const std::vector<const GroundTruthUnit*>& page_units,
                                std::size_t page, bool has_next);

}  // namespace scrapelab::webserve
