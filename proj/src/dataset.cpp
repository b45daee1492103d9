#include "deal/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "deal/diagnostics.hpp"
#include "deal/random.hpp"

namespace deal {
namespace {

struct SparseRow {
    std::vector<std::pair<std::size_t, double>> entries;
};

std::vector<std::string_view> tokenize(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace

Dataset parse_sparse(std::istream& in) {
    Dataset data;
    std::unordered_map<std::string, int> class_ids;
    std::vector<SparseRow> rows;
    std::size_t dims = 0;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto tokens = tokenize(line);
        if (tokens.empty()) continue;

        const std::string label(tokens[0]);
        if (label.find(':') != std::string::npos) throw ParseError(line_no, "missing label");
        auto [it, inserted] = class_ids.try_emplace(label, static_cast<int>(data.class_names.size()));
        if (inserted) data.class_names.push_back(label);
        data.labels.push_back(it->second);

        SparseRow row;
        std::size_t prev = 0;
        for (std::size_t i = 1; i < tokens.size(); ++i) {
            const auto tok = tokens[i];
            const auto colon = tok.find(':');
            if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
                throw ParseError(line_no, "malformed feature '" + std::string(tok) + "'");
            std::size_t idx = 0;
            auto r1 = std::from_chars(tok.data(), tok.data() + colon, idx);
            if (r1.ec != std::errc() || r1.ptr != tok.data() + colon || idx == 0)
                throw ParseError(line_no, "bad feature index '" + std::string(tok.substr(0, colon)) + "'");
            double val = 0.0;
            const char* vbeg = tok.data() + colon + 1;
            // from_chars rejects a leading '+', which some writers emit.
            if (*vbeg == '+') ++vbeg;
            auto r2 = std::from_chars(vbeg, tok.data() + tok.size(), val);
            if (r2.ec != std::errc() || r2.ptr != tok.data() + tok.size() || !std::isfinite(val))
                throw ParseError(line_no, "bad feature value '" + std::string(tok.substr(colon + 1)) + "'");
            if (idx <= prev) throw ParseError(line_no, "feature indices must be strictly increasing");
            prev = idx;
            row.entries.emplace_back(idx, val);
        }
        dims = std::max(dims, prev);
        rows.push_back(std::move(row));
    }

    data.features = Matrix(rows.size(), dims);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (auto [idx, val] : rows[r].entries) data.features(r, idx - 1) = val;
    return data;
}

Dataset parse_sparse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
    return parse_sparse(in);
}

void write_sparse(std::ostream& out, const Dataset& data) {
    char buf[64];
    for (std::size_t r = 0; r < data.size(); ++r) {
        out << data.class_names[static_cast<std::size_t>(data.labels[r])];
        auto row = data.features.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (row[c] == 0.0) continue;
            auto res = std::to_chars(buf, buf + sizeof buf, row[c]);
            out << ' ' << (c + 1) << ':' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
        out << '\n';
    }
}

Dataset subset(const Dataset& data, const std::vector<std::size_t>& ids) {
    Dataset out;
    out.class_names = data.class_names;
    out.features = Matrix(ids.size(), data.dims());
    out.labels.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= data.size()) throw std::out_of_range("subset id out of range");
        std::copy_n(data.features.row(ids[i]).begin(), data.dims(), out.features.row(i).begin());
        out.labels.push_back(data.labels[ids[i]]);
    }
    return out;
}

Split split(const Dataset& data, double train_fraction, std::uint64_t seed) {
    if (data.size() < 2) throw std::invalid_argument("split needs at least 2 instances");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("train fraction must lie in (0,1)");
    std::vector<std::size_t> perm(data.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = make_rng(seed, 0x5b1);
    shuffle(perm, rng);

    auto n_train = static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(data.size()) - 1e-9));
    n_train = std::clamp<std::size_t>(n_train, 1, data.size() - 1);

    Split s;
    s.train_ids.assign(perm.begin(), perm.begin() + static_cast<long>(n_train));
    s.test_ids.assign(perm.begin() + static_cast<long>(n_train), perm.end());
    s.train = subset(data, s.train_ids);
    s.test = subset(data, s.test_ids);
    return s;
}

MinMaxScaler MinMaxScaler::fit(const Matrix& x) {
    MinMaxScaler s;
    s.lo.assign(x.cols(), 0.0);
    s.hi.assign(x.cols(), 0.0);
    for (std::size_t c = 0; c < x.cols(); ++c) {
        double lo = x.rows() ? x(0, c) : 0.0, hi = lo;
        for (std::size_t r = 1; r < x.rows(); ++r) {
            lo = std::min(lo, x(r, c));
            hi = std::max(hi, x(r, c));
        }
        s.lo[c] = lo;
        s.hi[c] = hi;
    }
    return s;
}

Matrix MinMaxScaler::apply(const Matrix& x) const {
    if (x.cols() != lo.size()) throw std::invalid_argument("scaler dimension mismatch");
    Matrix out = x;
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) {
            const double span = hi[c] - lo[c];
            out(r, c) = span > 0.0 ? (x(r, c) - lo[c]) / span : 0.0;
        }
    return out;
}

PoolPartition seed_initial_labels(const Dataset& train_pool, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0x1abe1);
    std::vector<std::vector<std::size_t>> by_class(train_pool.classes());
    for (std::size_t i = 0; i < train_pool.size(); ++i)
        by_class[static_cast<std::size_t>(train_pool.labels[i])].push_back(i);

    PoolPartition part;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (by_class[c].empty()) {
            warn("class '" + train_pool.class_names[c] + "' absent from the train pool; skipped");
            continue;
        }
        part.labeled.push_back(by_class[c][uniform_index(rng, by_class[c].size())]);
    }
    part.degenerate = part.labeled.size() < 2;
    std::vector<bool> taken(train_pool.size(), false);
    for (auto i : part.labeled) taken[i] = true;
    for (std::size_t i = 0; i < train_pool.size(); ++i)
        if (!taken[i]) part.unlabeled.push_back(i);
    return part;
}

}  // namespace deal
