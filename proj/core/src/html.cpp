#include "scrapelab/html.hpp"

#include "scrapelab/common.hpp"

namespace scrapelab::webserve {

namespace {

void append_head(std::string& out, const std::string& title) {
  out += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n";
  out += "<meta charset=\"utf-8\">\n<title>" + title + "</title>\n";
  out += "</head>\n<body>\n";
}

}  // namespace

std::string render_unit_page(const GroundTruthUnit& unit) {
  std::string out;
  out.reserve(1024);
  append_head(out, "unit " + unit.id);
  out += "<nav class=\"crumbs\"><a href=\"/catalogue\">catalogue</a></nav>\n";
  out += "<article class=\"unit\" data-unit-id=\"" + unit.id +
         "\" data-created-at=\"" + format_double(unit.created_at) + "\">\n";
  out += "<h1>unit " + unit.id + "</h1>\n";
  out += "<dl class=\"attributes\">\n";
  for (const auto& [name, value] : unit.attributes) {
    std::string v = format_double(value);
    out += "  <div class=\"attribute\"><dt>" + name + "</dt><dd data-attr=\"" +
           name + "\" data-value=\"" + v + "\">" + v + "</dd></div>\n";
  }
  out += "</dl>\n";
  out += "<ul class=\"markers\">\n";
  for (const auto& m : unit.markers) {
    out += "  <li class=\"marker\">" + m + "</li>\n";
  }
  out += "</ul>\n";
  out += "<p class=\"blurb\">Listing " + unit.id +
         " has been part of this catalogue since day one of its run.</p>\n";
  if (!unit.out_links.empty()) {
    out += "<section class=\"similar\">\n<h2>similar listings</h2>\n";
    for (const auto& id : unit.out_links) {
      out += "  <a class=\"similar-link\" href=\"/unit/" + id + "\">unit " + id +
             "</a>\n";
    }
    out += "</section>\n";
  }
  out += "</article>\n</body>\n</html>\n";
  return out;
}

std::string render_listing_page(const std::string& title,
                                const std::vector<const GroundTruthUnit*>& page_units,
                                std::size_t page, bool has_next) {
  std::string out;
  out.reserve(256 + page_units.size() * 64);
  append_head(out, title);
  out += "<h1>" + title + "</h1>\n";
  out += "<p class=\"page-meta\">page " + std::to_string(page) + "</p>\n";
  out += "<ol class=\"results\">\n";
  for (const auto* u : page_units) {
    out += "  <li><a class=\"unit-link\" href=\"/unit/" + u->id + "\">unit " +
           u->id + "</a></li>\n";
  }
  out += "</ol>\n";
  if (has_next) {
    out += "<p class=\"pager\">more results on page " + std::to_string(page + 1) +
           "</p>\n";
  }
  out += "</body>\n</html>\n";
  return out;
}

}  // namespace scrapelab::webserve
