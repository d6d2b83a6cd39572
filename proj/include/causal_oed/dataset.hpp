#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "causal_oed/errors.hpp"
#include "causal_oed/graph.hpp"

namespace causal_oed {

/// One observation: a complete state vector plus the set of nodes that were
/// clamped by intervention when the row was generated.
struct DatasetRow {
    std::vector<std::uint8_t> states;
    NodeSet manipulated = 0;

    bool operator==(const DatasetRow&) const = default;
};

/// A mixed observational/interventional dataset over a fixed node set with
/// fixed arities. Rows only accumulate; version() increments on every append
/// so score caches can notice staleness.
class InterventionalDataset {
public:
    InterventionalDataset(int num_nodes, std::vector<int> arities)
        : num_nodes_(num_nodes), arities_(std::move(arities)) {
        if (num_nodes_ < 1 || num_nodes_ > kMaxNodes)
            throw ValidationError("InterventionalDataset: num_nodes must be in [1, " +
                                  std::to_string(kMaxNodes) + "]");
        if (arities_.size() != static_cast<std::size_t>(num_nodes_))
            throw DimensionError("InterventionalDataset: arity vector size mismatch");
        for (int r : arities_)
            if (r < 2) throw ValidationError("InterventionalDataset: arities must be >= 2");
    }

    int num_nodes() const { return num_nodes_; }
    int arity(NodeId i) const { return arities_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& arities() const { return arities_; }
    std::int64_t num_rows() const { return static_cast<std::int64_t>(rows_.size()); }
    const std::vector<DatasetRow>& rows() const { return rows_; }
    const DatasetRow& row(std::int64_t n) const { return rows_[static_cast<std::size_t>(n)]; }
    std::uint64_t version() const { return version_; }

    void append(DatasetRow row) {
        if (row.states.size() != static_cast<std::size_t>(num_nodes_))
            throw DimensionError("append: row has wrong number of states");
        if (row.manipulated & ~full_set(num_nodes_))
            throw ValidationError("append: manipulated set references a node out of range");
        for (NodeId i = 0; i < num_nodes_; ++i)
            if (row.states[static_cast<std::size_t>(i)] >= arity(i))
                throw ValidationError("append: state of node " + std::to_string(i) +
                                      " exceeds its arity");
        rows_.push_back(std::move(row));
        ++version_;
    }

    void append_all(const InterventionalDataset& other) {
        if (other.num_nodes_ != num_nodes_ || other.arities_ != arities_)
            throw DimensionError("append_all: datasets disagree on nodes or arities");
        for (const auto& r : other.rows_) append(r);
    }

private:
    int num_nodes_;
    std::vector<int> arities_;
    std::vector<DatasetRow> rows_;
    std::uint64_t version_ = 0;
};

/// CSV layout: header X0,...,X{V-1},target then one row per observation.
/// target is the manipulated node index, or -1 for observational rows. The
/// format carries at most one manipulated node; rows with larger sets exist
/// only in memory and are rejected here.
inline void write_csv(const InterventionalDataset& data, std::ostream& os) {
    const int V = data.num_nodes();
    for (NodeId i = 0; i < V; ++i) os << 'X' << i << ',';
    os << "target\n";
    for (const auto& row : data.rows()) {
        if (set_size(row.manipulated) > 1)
            throw ValidationError("write_csv: row manipulates more than one node");
        for (NodeId i = 0; i < V; ++i) os << int{row.states[static_cast<std::size_t>(i)]} << ',';
        os << (row.manipulated ? set_to_nodes(row.manipulated).front() : -1) << '\n';
    }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline int parse_int_field(const std::string& s, std::int64_t line_no) {
    std::size_t pos = 0;
    int value;
    try {
        value = std::stoi(s, &pos);
    } catch (const std::exception&) {
        throw ParseError("csv line " + std::to_string(line_no) + ": '" + s + "' is not an integer");
    }
    if (pos != s.size())
        throw ParseError("csv line " + std::to_string(line_no) + ": trailing characters in '" + s +
                         "'");
    return value;
}

}  // namespace detail

/// Reads the CSV layout above. Arities are taken from the data (max observed
/// state + 1, floor 2) unless an explicit arity vector is given.
inline InterventionalDataset read_csv(std::istream& is,
                                      const std::vector<int>* arities = nullptr) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("csv: empty input, expected header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header.back() != "target")
        throw ParseError("csv: header must be X0,...,X{V-1},target");
    const int V = static_cast<int>(header.size()) - 1;
    for (NodeId i = 0; i < V; ++i)
        if (header[static_cast<std::size_t>(i)] != "X" + std::to_string(i))
            throw ParseError("csv: header column " + std::to_string(i) + " must be X" +
                             std::to_string(i));
    if (V > kMaxNodes) throw ParseError("csv: too many columns");

    std::vector<DatasetRow> rows;
    std::vector<int> seen_max(static_cast<std::size_t>(V), 1);
    std::int64_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError("csv line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        DatasetRow row;
        row.states.resize(static_cast<std::size_t>(V));
        for (NodeId i = 0; i < V; ++i) {
            const int s = detail::parse_int_field(fields[static_cast<std::size_t>(i)], line_no);
            if (s < 0 || s > 255)
                throw ParseError("csv line " + std::to_string(line_no) + ": state out of range");
            row.states[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(s);
            seen_max[static_cast<std::size_t>(i)] =
                std::max(seen_max[static_cast<std::size_t>(i)], s);
        }
        const int target = detail::parse_int_field(fields.back(), line_no);
        if (target < -1 || target >= V)
            throw ParseError("csv line " + std::to_string(line_no) + ": target out of range");
        if (target >= 0) row.manipulated = node_bit(target);
        rows.push_back(std::move(row));
    }

    std::vector<int> use_arities;
    if (arities) {
        use_arities = *arities;
    } else {
        use_arities.reserve(static_cast<std::size_t>(V));
        for (int m : seen_max) use_arities.push_back(std::max(2, m + 1));
    }
    InterventionalDataset data(V, use_arities);
    for (auto& r : rows) data.append(std::move(r));
    return data;
}

}  // namespace causal_oed
