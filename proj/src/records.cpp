#include "nexc/records.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "nexc/errors.hpp"

namespace nexc {

using nlohmann::json;

namespace {

ParseError at_line(const std::string& origin, std::size_t line, const std::string& what) {
    return ParseError(origin + ": line " + std::to_string(line) + ": " + what);
}

} // namespace

std::vector<RawRecord> parse_records(std::istream& in, const std::string& origin) {
    std::vector<RawRecord> records;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw at_line(origin, lineno, e.what());
        }
        if (!j.is_object()) throw at_line(origin, lineno, "expected a JSON object");

        RawRecord r;
        try {
            r.id = j.at("id").get<std::string>();
            r.name_ref = j.at("name_ref").get<std::string>();
            r.year = j.at("year").get<int>();
            r.authors = j.at("authors").get<std::vector<std::string>>();
            r.title = j.at("title").get<std::string>();
            r.venue = j.at("venue").get<std::string>();
            if (j.contains("label") && !j["label"].is_null())
                r.gold_label = j["label"].get<std::string>();
        } catch (const json::exception& e) {
            throw at_line(origin, lineno, e.what());
        }
        if (r.year <= 0) throw at_line(origin, lineno, "year must be positive");
        if (!seen_ids.insert(r.id).second)
            throw at_line(origin, lineno, "duplicate record id '" + r.id + "'");
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<RawRecord> load_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open dataset");
    return parse_records(in, path);
}

void save_records(const std::vector<RawRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(path + ": cannot open for writing");
    for (const auto& r : records) {
        json j{{"id", r.id},       {"name_ref", r.name_ref}, {"year", r.year},
               {"authors", r.authors}, {"title", r.title},   {"venue", r.venue}};
        if (r.gold_label) j["label"] = *r.gold_label;
        out << j.dump() << '\n';
    }
}

std::vector<std::string> list_name_refs(const std::vector<RawRecord>& records) {
    std::vector<std::string> refs;
    std::unordered_set<std::string> seen;
    for (const auto& r : records)
        if (seen.insert(r.name_ref).second) refs.push_back(r.name_ref);
    return refs;
}

std::vector<RawRecord> filter_name_ref(const std::vector<RawRecord>& records,
                                       const std::string& name_ref) {
    std::vector<RawRecord> out;
    for (const auto& r : records)
        if (r.name_ref == name_ref) out.push_back(r);
    return out;
}

} // namespace nexc
