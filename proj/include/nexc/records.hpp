#pragma once

#include <optional>
#include <string>
#include <vector>

namespace nexc {

/// One time-stamped bibliographic record for an ambiguous name reference.
struct RawRecord {
    std::string id;
    std::string name_ref;
    int year = 0;
    std::vector<std::string> authors; // co-authors, excluding the name reference itself
    std::string title;
    std::string venue;
    std::optional<std::string> gold_label; // distinct-person identifier, if known
};

// Line-delimited JSON dataset, one record per line. Fields: id, name_ref,
// year, authors (array), title, venue, label (optional). Throws ParseError
// with the 1-based line number on malformed input or duplicate ids.
std::vector<RawRecord> load_records(const std::string& path);
std::vector<RawRecord> parse_records(std::istream& in, const std::string& origin);
void save_records(const std::vector<RawRecord>& records, const std::string& path);

/// Distinct name_ref values in dataset order (first occurrence).
std::vector<std::string> list_name_refs(const std::vector<RawRecord>& records);

/// Records matching one name reference, original order preserved.
std::vector<RawRecord> filter_name_ref(const std::vector<RawRecord>& records,
                                       const std::string& name_ref);

} // namespace nexc
