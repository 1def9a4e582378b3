#include "dosesens/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dosesens/rng.hpp"

namespace dosesens {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::SingletonSet: return "SingletonSet";
        case ErrorCode::InconsistentCovariateDim: return "InconsistentCovariateDim";
        case ErrorCode::SetTooLarge: return "SetTooLarge";
        case ErrorCode::InvalidWeights: return "InvalidWeights";
        case ErrorCode::UnknownKind: return "UnknownKind";
        case ErrorCode::RankDeficientQ: return "RankDeficientQ";
        case ErrorCode::TooFewSets: return "TooFewSets";
        case ErrorCode::LeverageOne: return "LeverageOne";
        case ErrorCode::DegenerateThreshold: return "DegenerateThreshold";
        case ErrorCode::BadWeights: return "BadWeights";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::Unbounded: return "Unbounded";
        case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
        case ErrorCode::EmptyInterval: return "EmptyInterval";
        case ErrorCode::BadConfig: return "BadConfig";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

int MatchedDataset::total_units() const {
    int n = 0;
    for (const auto& s : sets) n += s.size();
    return n;
}

void MatchedDataset::validate() const {
    if (sets.empty()) throw Error(ErrorCode::TooFewSets, "dataset has no matched sets");
    for (const auto& s : sets) {
        if (s.size() < 2)
            throw Error(ErrorCode::SingletonSet, "matched set '" + s.set_id + "' has fewer than 2 units");
        if (s.outcomes.size() != s.doses.size())
            throw Error(ErrorCode::NonFiniteValue, "doses/outcomes length mismatch in set '" + s.set_id + "'");
        for (double z : s.doses)
            if (!std::isfinite(z))
                throw Error(ErrorCode::NonFiniteValue, "non-finite dose in set '" + s.set_id + "'");
        for (double r : s.outcomes)
            if (!std::isfinite(r))
                throw Error(ErrorCode::NonFiniteValue, "non-finite outcome in set '" + s.set_id + "'");
        if (!s.covariates.empty()) {
            if (static_cast<int>(s.covariates.size()) != s.size())
                throw Error(ErrorCode::InconsistentCovariateDim,
                            "covariate rows do not match unit count in set '" + s.set_id + "'");
            for (const auto& x : s.covariates) {
                if (static_cast<int>(x.size()) != covariate_dim)
                    throw Error(ErrorCode::InconsistentCovariateDim,
                                "covariate dimension differs in set '" + s.set_id + "'");
                for (double v : x)
                    if (!std::isfinite(v))
                        throw Error(ErrorCode::NonFiniteValue, "non-finite covariate in set '" + s.set_id + "'");
            }
        } else if (covariate_dim != 0) {
            throw Error(ErrorCode::InconsistentCovariateDim,
                        "set '" + s.set_id + "' is missing covariates");
        }
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_finite(const std::string& field, const std::string& what, int line_no) {
    try {
        std::size_t pos = 0;
        double v = std::stod(field, &pos);
        if (pos != field.size() || !std::isfinite(v))
            throw Error(ErrorCode::NonFiniteValue,
                        what + " '" + field + "' on line " + std::to_string(line_no));
        return v;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw Error(ErrorCode::NonFiniteValue,
                    what + " '" + field + "' on line " + std::to_string(line_no));
    }
}

}  // namespace

MatchedDataset parse_dataset_csv(const std::string& csv_text, const CsvSchema& schema) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorCode::MissingColumn, "empty CSV input");

    std::vector<std::string> header = split_csv_line(line);
    for (auto& h : header) h = trim(h);

    auto find_col = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    };

    int c_set = find_col(schema.set_id);
    int c_dose = find_col(schema.dose);
    int c_out = find_col(schema.outcome);
    if (c_set < 0) throw Error(ErrorCode::MissingColumn, "missing column '" + schema.set_id + "'");
    if (c_dose < 0) throw Error(ErrorCode::MissingColumn, "missing column '" + schema.dose + "'");
    if (c_out < 0) throw Error(ErrorCode::MissingColumn, "missing column '" + schema.outcome + "'");

    std::vector<int> c_cov;
    if (!schema.covariates.empty()) {
        for (const auto& name : schema.covariates) {
            int c = find_col(name);
            if (c < 0) throw Error(ErrorCode::MissingColumn, "missing covariate column '" + name + "'");
            c_cov.push_back(c);
        }
    } else {
        for (int k = 1;; ++k) {
            int c = find_col("x" + std::to_string(k));
            if (c < 0) break;
            c_cov.push_back(c);
        }
    }

    MatchedDataset ds;
    ds.covariate_dim = static_cast<int>(c_cov.size());
    std::vector<std::string> set_order;   // first-appearance order of set ids
    std::vector<int> set_slot;            // parallel index into ds.sets

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split_csv_line(line);
        auto field = [&](int c) -> std::string {
            if (c >= static_cast<int>(fields.size()))
                throw Error(ErrorCode::MissingColumn,
                            "line " + std::to_string(line_no) + " has too few fields");
            return trim(fields[c]);
        };

        std::string sid = field(c_set);
        int slot = -1;
        for (std::size_t i = 0; i < set_order.size(); ++i)
            if (set_order[i] == sid) { slot = set_slot[i]; break; }
        if (slot < 0) {
            slot = static_cast<int>(ds.sets.size());
            set_order.push_back(sid);
            set_slot.push_back(slot);
            ds.sets.push_back(MatchedSet{sid, {}, {}, {}});
        }
        MatchedSet& s = ds.sets[slot];
        s.doses.push_back(parse_finite(field(c_dose), "dose", line_no));
        s.outcomes.push_back(parse_finite(field(c_out), "outcome", line_no));
        if (!c_cov.empty()) {
            std::vector<double> x;
            x.reserve(c_cov.size());
            for (int c : c_cov) x.push_back(parse_finite(field(c), "covariate", line_no));
            s.covariates.push_back(std::move(x));
        }
    }

    ds.validate();
    return ds;
}

MatchedDataset load_dataset(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset_csv(buf.str(), schema);
}

std::vector<int> order_index(const MatchedSet& set) {
    int n = set.size();
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return set.doses[a] < set.doses[b]; });
    std::vector<int> k(n);
    for (int pos = 0; pos < n; ++pos) k[idx[pos]] = pos + 1;
    return k;
}

std::vector<double> sorted_doses(const MatchedSet& set) {
    std::vector<double> z = set.doses;
    std::sort(z.begin(), z.end());
    return z;
}

std::int64_t factorial(int n) {
    std::int64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

PermutationTable enumerate_assignments(int n, int cap) {
    if (cap > kMaxEnumerationCap) cap = kMaxEnumerationCap;
    if (n > cap)
        throw Error(ErrorCode::SetTooLarge,
                    "set size " + std::to_string(n) + " exceeds enumeration cap " + std::to_string(cap));
    PermutationTable table;
    table.n = n;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    table.perms.reserve(static_cast<std::size_t>(factorial(n)));
    do {
        table.perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return table;
}

int sample_assignment(const std::vector<double>& weights, std::uint64_t rng_seed) {
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw Error(ErrorCode::InvalidWeights, "negative or NaN weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw Error(ErrorCode::InvalidWeights,
                    "weights sum to " + std::to_string(total) + ", expected 1");
    auto rng = make_engine(rng_seed, 0x73616d70);
    return sample_categorical(weights, rng);
}

}  // namespace dosesens
