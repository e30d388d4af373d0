#include "structsel/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace structsel {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
    const auto h = line.find('#');
    return h == std::string::npos ? line : line.substr(0, h);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw Error("truncated binary dictionary");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

constexpr char kDictMagic[8] = {'S', 'S', 'D', 'I', 'C', 'T', '0', '1'};

}  // namespace

RegistryPtr read_registry(std::istream& in) {
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> bundles;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.find(',') != std::string::npos) {
            std::vector<std::string> bundle;
            for (const auto& part : split(line, ',')) {
                const std::string name = trim(part);
                if (name.empty()) throw Error("empty name in bundle line: " + line);
                names.push_back(name);
                bundle.push_back(name);
            }
            bundles.push_back(std::move(bundle));
        } else {
            names.push_back(line);
        }
    }
    return VarRegistry::create(std::move(names), std::move(bundles));
}

RegistryPtr read_registry_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open registry file: " + path);
    return read_registry(in);
}

void write_registry(std::ostream& out, const RegistryPtr& reg) {
    const int n = static_cast<int>(reg->size());
    for (int i = 0; i < n; ++i) {
        const std::uint64_t bundle = reg->bundle_of(i);
        if (bundle != 0) {
            if ((bundle & ((std::uint64_t{1} << i) - 1)) != 0) continue;  // printed already
            bool first = true;
            for (int j = i; j < n; ++j) {
                if (!((bundle >> j) & 1u)) continue;
                out << (first ? "" : ", ") << reg->name(j);
                first = false;
            }
            out << "\n";
        } else {
            out << reg->name(i) << "\n";
        }
    }
}

void write_dictionary_ndjson(std::ostream& out, const Dictionary& d) {
    for (std::size_t i = 0; i < d.size(); ++i) {
        nlohmann::json row = d.at(i).to_names();
        out << row.dump() << "\n";
    }
}

Dictionary read_dictionary_ndjson(std::istream& in, const RegistryPtr& reg) {
    std::vector<std::uint64_t> masks;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error("dictionary line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!row.is_array())
            throw Error("dictionary line " + std::to_string(lineno) + ": expected an array");
        std::uint64_t m = 0;
        for (const auto& name : row) {
            if (!name.is_string())
                throw Error("dictionary line " + std::to_string(lineno) + ": non-string member");
            m |= std::uint64_t{1} << reg->index(name.get<std::string>());
        }
        masks.push_back(m);
    }
    return Dictionary::from_masks(reg, std::move(masks));
}

void write_dictionary_binary(std::ostream& out, const Dictionary& d) {
    out.write(kDictMagic, sizeof(kDictMagic));
    put_u64(out, 1);  // version
    put_u64(out, d.registry()->content_hash());
    put_u64(out, d.size());
    for (std::uint64_t m : d.masks()) put_u64(out, m);
}

Dictionary read_dictionary_binary(std::istream& in, const RegistryPtr& reg) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kDictMagic, sizeof(magic)) != 0)
        throw Error("not a binary dictionary file");
    const std::uint64_t version = get_u64(in);
    if (version != 1) throw Error("unsupported dictionary version " + std::to_string(version));
    const std::uint64_t hash = get_u64(in);
    if (hash != reg->content_hash())
        throw RegistryMismatch("dictionary was written against a different registry");
    const std::uint64_t count = get_u64(in);
    std::vector<std::uint64_t> masks;
    masks.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) masks.push_back(get_u64(in));
    return Dictionary(reg, std::move(masks));
}

void write_grouping(std::ostream& out, const GroupingStructure& g) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < g.size(); ++i) {
        nlohmann::json item;
        item["name"] = g.names[i];
        item["members"] = g.groups[i].to_names();
        item["weight"] = g.weights[i];
        arr.push_back(std::move(item));
    }
    out << arr.dump(2) << "\n";
}

GroupingStructure read_grouping(std::istream& in, const RegistryPtr& reg) {
    nlohmann::json arr;
    try {
        in >> arr;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("grouping file: ") + e.what());
    }
    if (!arr.is_array()) throw Error("grouping file must be a JSON array");
    std::vector<VarSet> groups;
    std::vector<double> weights;
    std::vector<std::string> names;
    bool any_weight = false;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& item = arr[i];
        if (!item.is_object() || !item.contains("members") || !item["members"].is_array())
            throw Error("grouping entry " + std::to_string(i) + " needs a members array");
        std::vector<std::string> members;
        for (const auto& m : item["members"]) members.push_back(m.get<std::string>());
        groups.push_back(VarSet::of(reg, members));
        names.push_back(item.value("name", "g" + std::to_string(i + 1)));
        if (item.contains("weight")) {
            any_weight = true;
            weights.push_back(item["weight"].get<double>());
        } else {
            weights.push_back(std::sqrt(static_cast<double>(members.size())));
        }
    }
    if (!any_weight) weights.clear();
    return GroupingStructure::make(reg, std::move(groups), std::move(weights), std::move(names));
}

GroupingStructure read_grouping_file(const std::string& path, const RegistryPtr& reg) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open grouping file: " + path);
    return read_grouping(in, reg);
}

void write_design_csv(std::ostream& out, const Design& design, const std::string& outcome_name) {
    const auto& names = design.reg->names();
    for (const auto& n : names) out << n << ",";
    out << outcome_name << "\n";
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < design.X.rows(); ++i) {
        for (Eigen::Index j = 0; j < design.X.cols(); ++j) out << design.X(i, j) << ",";
        out << design.y[i] << "\n";
    }
}

Design read_design_csv(std::istream& in, OutcomeKind kind, const std::string& outcome_name) {
    std::string line;
    if (!std::getline(in, line)) throw Error("empty CSV");
    std::vector<std::string> header;
    for (const auto& h : split(trim(line), ',')) header.push_back(trim(h));
    if (header.size() < 2) throw Error("CSV needs at least one covariate and the outcome");

    int outcome_col = -1;
    if (outcome_name.empty()) {
        outcome_col = static_cast<int>(header.size()) - 1;
    } else {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == outcome_name) outcome_col = static_cast<int>(j);
        if (outcome_col < 0) throw Error("outcome column not found: " + outcome_name);
    }
    std::vector<std::string> names;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (static_cast<int>(j) != outcome_col) names.push_back(header[j]);
    RegistryPtr reg = VarRegistry::create(names);

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split(trim(line), ',');
        if (cells.size() != header.size())
            throw Error("CSV line " + std::to_string(lineno) + ": expected " +
                        std::to_string(header.size()) + " cells, got " +
                        std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            try {
                row.push_back(std::stod(trim(cells[j])));
            } catch (const std::exception&) {
                throw Error("CSV line " + std::to_string(lineno) + ", column " + header[j] +
                            ": not a number");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error("CSV has no data rows");

    Design d;
    d.reg = reg;
    d.kind = kind;
    d.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    d.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        int k = 0;
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            if (static_cast<int>(j) == outcome_col)
                d.y[static_cast<Eigen::Index>(i)] = rows[i][j];
            else
                d.X(static_cast<Eigen::Index>(i), k++) = rows[i][j];
        }
    }
    d.validate();
    return d;
}

Design read_design_csv_file(const std::string& path, OutcomeKind kind,
                            const std::string& outcome_name) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open CSV file: " + path);
    return read_design_csv(in, kind, outcome_name);
}

std::string slurp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace structsel
