#include "entropy_forge/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "entropy_forge/errors.hpp"

namespace ef {

using nlohmann::json;

// --- function tables --------------------------------------------------------

void FunctionTable::validate() const {
    if (in_bits < 1 || in_bits > 20) throw ParamError("FunctionTable: in_bits must be in [1,20]");
    if (out_bits < 0 || out_bits > 64) throw ParamError("FunctionTable: bad out_bits");
    if (table.size() != (size_t(1) << in_bits)) throw ParamError("FunctionTable: wrong table size");
    uint64_t mask = out_bits >= 64 ? ~uint64_t(0) : ((uint64_t(1) << out_bits) - 1);
    for (uint64_t v : table)
        if (v & ~mask) throw ParamError("FunctionTable: value exceeds out_bits");
}

FunctionTable FunctionTable::identity(int n) {
    FunctionTable f{n, n, {}};
    f.table.resize(size_t(1) << n);
    for (uint64_t x = 0; x < f.table.size(); ++x) f.table[x] = x;
    f.validate();
    return f;
}

FunctionTable FunctionTable::constant(int n, uint64_t c) {
    FunctionTable f{n, n, std::vector<uint64_t>(size_t(1) << n, c)};
    f.validate();
    return f;
}

FunctionTable FunctionTable::drop_last_bit(int n) {
    FunctionTable f{n, n, {}};
    f.table.resize(size_t(1) << n);
    for (uint64_t x = 0; x < f.table.size(); ++x) f.table[x] = x & ~uint64_t(1);
    f.validate();
    return f;
}

FunctionTable FunctionTable::random_function(int n, uint64_t seed) {
    SeedStream rng = SeedStream(seed).child("owf-random-table");
    FunctionTable f{n, n, {}};
    f.table.resize(size_t(1) << n);
    for (uint64_t x = 0; x < f.table.size(); ++x) f.table[x] = rng.below(uint64_t(1) << n);
    f.validate();
    return f;
}

FunctionTable FunctionTable::builtin(const std::string& name, int n, uint64_t seed) {
    if (name == "identity") return identity(n);
    if (name == "constant0") return constant(n, 0);
    if (name == "drop-last") return drop_last_bit(n);
    if (name == "random") return random_function(n, seed);
    throw ParamError("FunctionTable: unknown builtin '" + name + "'");
}

// --- concrete generators -----------------------------------------------------

namespace {

class OwfGenerator final : public BlockGenerator {
public:
    OwfGenerator(FunctionTable f, int n, int chunk, int pad)
        : BlockGenerator(n, 0, f.in_bits, make_blocks(f, chunk, pad)),
          f_(std::move(f)),
          chunk_(chunk),
          pad_(pad) {}

    std::vector<Bits> eval(const Bits&, const Bits& x) const override {
        uint64_t y = f_.table[x.to_u64()];
        Bits padded = Bits(y, f_.out_bits).concat(Bits::zeros(pad_));
        std::vector<Bits> out;
        int chunks = (f_.out_bits + pad_) / chunk_;
        out.reserve(chunks + 1);
        for (int i = 0; i < chunks; ++i) out.push_back(padded.slice(i * chunk_, chunk_));
        out.push_back(x);
        return out;
    }

    json to_json() const override {
        json jf = {{"in_bits", f_.in_bits}, {"out_bits", f_.out_bits}};
        std::vector<std::string> rows;
        rows.reserve(f_.table.size());
        for (uint64_t v : f_.table) rows.push_back(Bits(v, f_.out_bits).to_hex());
        jf["table_hex"] = rows;
        return json{{"kind", "owf"}, {"n", n_}, {"pad_bits", pad_}, {"f", jf}};
    }

    const FunctionTable& f() const { return f_; }
    int pad() const { return pad_; }

private:
    static std::vector<int> make_blocks(const FunctionTable& f, int chunk, int pad) {
        std::vector<int> blocks((f.out_bits + pad) / chunk, chunk);
        blocks.push_back(f.in_bits);
        return blocks;
    }
    FunctionTable f_;
    int chunk_;
    int pad_;
};

class BitBlocksGenerator final : public BlockGenerator {
public:
    explicit BitBlocksGenerator(int n) : BlockGenerator(n, 0, n, std::vector<int>(n, 1)) {}
    std::vector<Bits> eval(const Bits&, const Bits& x) const override {
        std::vector<Bits> out;
        out.reserve(seed_bits_);
        for (int i = 0; i < seed_bits_; ++i) out.push_back(x.slice(i, 1));
        return out;
    }
    json to_json() const override { return json{{"kind", "bit-blocks"}, {"n", n_}}; }
};

class TableGenerator final : public BlockGenerator {
public:
    TableGenerator(int n, int seed_bits, std::vector<int> block_bits,
                   std::vector<std::vector<Bits>> rows)
        : BlockGenerator(n, 0, seed_bits, std::move(block_bits)), rows_(std::move(rows)) {
        if (rows_.size() != (size_t(1) << seed_bits)) throw ParamError("TableGenerator: wrong row count");
        for (const auto& row : rows_) {
            if (row.size() != block_bits_.size()) throw ParamError("TableGenerator: ragged row");
            for (size_t i = 0; i < row.size(); ++i)
                if (row[i].size() != block_bits_[i])
                    throw ParamError("TableGenerator: block width mismatch");
        }
    }
    std::vector<Bits> eval(const Bits&, const Bits& x) const override { return rows_[x.to_u64()]; }
    json to_json() const override {
        json rows = json::array();
        for (const auto& row : rows_) {
            json r = json::array();
            for (const auto& b : row) r.push_back(b.to_hex());
            rows.push_back(r);
        }
        return json{{"kind", "table"}, {"n", n_}, {"seed_bits", seed_bits_},
                    {"block_bits", block_bits_}, {"rows_hex", rows}};
    }

private:
    std::vector<std::vector<Bits>> rows_;
};

class PadBlocksGenerator final : public BlockGenerator {
public:
    PadBlocksGenerator(GenPtr base, int target_m)
        : BlockGenerator(base->n(), base->pp_bits(), base->seed_bits(),
                         make_blocks(*base, target_m)),
          base_(std::move(base)) {}

    std::vector<Bits> eval(const Bits& z, const Bits& x) const override {
        std::vector<Bits> out = base_->eval(z, x);
        while ((int)out.size() < block_count()) out.push_back(Bits(0, 1));
        return out;
    }
    json to_json() const override {
        return json{{"kind", "pad-blocks"}, {"target_m", block_count()}, {"base", base_->to_json()}};
    }

private:
    static std::vector<int> make_blocks(const BlockGenerator& base, int target_m) {
        if (target_m < base.block_count()) throw ParamError("pad_to_block_count: target below m");
        std::vector<int> blocks = base.block_bits();
        while ((int)blocks.size() < target_m) blocks.push_back(1);  // constant-value blocks
        return blocks;
    }
    GenPtr base_;
};

class PadLengthsGenerator final : public BlockGenerator {
public:
    explicit PadLengthsGenerator(GenPtr base)
        : BlockGenerator(base->n(), base->pp_bits(), base->seed_bits(),
                         std::vector<int>(base->block_count(), base->max_block_bits())),
          base_(std::move(base)) {}

    std::vector<Bits> eval(const Bits& z, const Bits& x) const override {
        std::vector<Bits> out = base_->eval(z, x);
        int ell = max_block_bits();
        for (auto& b : out)
            if (b.size() < ell) b = b.concat(Bits::zeros(ell - b.size()));
        return out;
    }
    json to_json() const override {
        return json{{"kind", "pad-lengths"}, {"base", base_->to_json()}};
    }

private:
    GenPtr base_;
};

class EqualizeGenerator final : public BlockGenerator {
public:
    static int log2_exact(int m) {
        if (m < 1 || (m & (m - 1)) != 0)
            throw ParamError("equalize: block count must be a power of two (pad first)");
        int b = 0;
        while ((1 << b) < m) ++b;
        return b;
    }

    EqualizeGenerator(GenPtr base, int w)
        : BlockGenerator(base->n(), base->pp_bits() * w,
                         log2_exact(base->block_count()) + w * base->seed_bits(),
                         make_blocks(*base, w)),
          base_(std::move(base)),
          w_(w) {}

    // Seed layout: j (log2 m bits, value j-1) then the w copy seeds.
    std::vector<Bits> eval(const Bits& z, const Bits& x) const override {
        int m = base_->block_count();
        int jbits = log2_exact(m);
        int j = (int)x.slice(0, jbits).to_u64() + 1;  // j in [1, m]
        std::vector<Bits> all;
        all.reserve(w_ * m);
        for (int c = 0; c < w_; ++c) {
            Bits zc = base_->pp_bits() ? z.slice(c * base_->pp_bits(), base_->pp_bits()) : Bits();
            Bits xc = x.slice(jbits + c * base_->seed_bits(), base_->seed_bits());
            std::vector<Bits> ys = base_->eval(zc, xc);
            for (auto& y : ys) all.push_back(std::move(y));
        }
        std::vector<Bits> out;
        out.reserve((w_ - 1) * m);
        for (int i = 0; i < (w_ - 1) * m; ++i) {
            int global = j - 1 + i;  // 0-based index into `all`
            if (i == 0)
                out.push_back(Bits(uint64_t(j - 1), jbits).concat(all[global]));
            else
                out.push_back(all[global]);
        }
        return out;
    }

    json to_json() const override {
        return json{{"kind", "equalize"}, {"w", w_}, {"base", base_->to_json()}};
    }

    const GenPtr& base() const { return base_; }
    int w() const { return w_; }

private:
    // Output i is base block ((j - 1 + i) mod m) of some copy, and j is part
    // of the seed, so widths can stay static only when the base blocks share
    // one width. Callers pad lengths first.
    static std::vector<int> make_blocks(const BlockGenerator& base, int w) {
        if (w < 2) throw ParamError("equalize: w must be >= 2");
        int m = base.block_count();
        int jbits = log2_exact(m);
        int ell = base.block_bits()[0];
        for (int b : base.block_bits())
            if (b != ell)
                throw ParamError("equalize: base blocks must share one width (pad lengths first)");
        std::vector<int> blocks((size_t)(w - 1) * m, ell);
        blocks[0] = jbits + ell;
        return blocks;
    }

    GenPtr base_;
    int w_;
};

class ProductGenerator final : public BlockGenerator {
public:
    ProductGenerator(GenPtr base, int v)
        : BlockGenerator(base->n(), base->pp_bits() * v, base->seed_bits() * v,
                         make_blocks(*base, v)),
          base_(std::move(base)),
          v_(v) {}

    std::vector<Bits> eval(const Bits& z, const Bits& x) const override {
        std::vector<std::vector<Bits>> runs;
        runs.reserve(v_);
        for (int c = 0; c < v_; ++c) {
            Bits zc = base_->pp_bits() ? z.slice(c * base_->pp_bits(), base_->pp_bits()) : Bits();
            Bits xc = x.slice(c * base_->seed_bits(), base_->seed_bits());
            runs.push_back(base_->eval(zc, xc));
        }
        std::vector<Bits> out;
        out.reserve(base_->block_count());
        for (int i = 0; i < base_->block_count(); ++i) {
            Bits b = runs[0][i];
            for (int c = 1; c < v_; ++c) b = b.concat(runs[c][i]);
            out.push_back(std::move(b));
        }
        return out;
    }

    json to_json() const override {
        return json{{"kind", "product"}, {"v", v_}, {"base", base_->to_json()}};
    }

    const GenPtr& base() const { return base_; }
    int v() const { return v_; }

private:
    static std::vector<int> make_blocks(const BlockGenerator& base, int v) {
        if (v < 1) throw ParamError("direct_product: v must be >= 1");
        std::vector<int> blocks;
        blocks.reserve(base.block_count());
        for (int b : base.block_bits()) blocks.push_back(b * v);
        return blocks;
    }
    GenPtr base_;
    int v_;
};

}  // namespace

int BlockGenerator::max_block_bits() const {
    int ell = 0;
    for (int b : block_bits_) ell = std::max(ell, b);
    return ell;
}

GenPtr owf_generator(FunctionTable f, int n) {
    f.validate();
    if (n < 2) throw ParamError("owf_generator: n must be >= 2");
    int chunk = (int)std::ceil(std::log2(double(n)));
    if (chunk < 1) chunk = 1;
    int pad = (chunk - f.out_bits % chunk) % chunk;
    return std::make_shared<OwfGenerator>(std::move(f), n, chunk, pad);
}

int owf_generator_pad_bits(const GenPtr& g) {
    if (auto* o = dynamic_cast<const OwfGenerator*>(g.get())) return o->pad();
    return 0;
}

GenPtr bit_blocks_generator(int n) {
    if (n < 1 || n > 20) throw ParamError("bit_blocks_generator: n must be in [1,20]");
    return std::make_shared<BitBlocksGenerator>(n);
}

GenPtr table_generator(int n, int seed_bits, std::vector<int> block_bits,
                       std::vector<std::vector<Bits>> rows) {
    return std::make_shared<TableGenerator>(n, seed_bits, std::move(block_bits), std::move(rows));
}

GenPtr pad_to_block_count(GenPtr g, int target_m) {
    return std::make_shared<PadBlocksGenerator>(std::move(g), target_m);
}

GenPtr pad_block_lengths(GenPtr g) { return std::make_shared<PadLengthsGenerator>(std::move(g)); }

GenPtr equalize(GenPtr g, int w) {
    bool uniform = true;
    for (int b : g->block_bits()) uniform = uniform && b == g->block_bits()[0];
    if (!uniform) g = pad_block_lengths(std::move(g));
    return std::make_shared<EqualizeGenerator>(std::move(g), w);
}

GenPtr direct_product(GenPtr g, int v) {
    bool uniform = true;
    for (int b : g->block_bits()) uniform = uniform && b == g->block_bits()[0];
    if (!uniform) g = pad_block_lengths(std::move(g));
    return std::make_shared<ProductGenerator>(std::move(g), v);
}

GenPtr generator_from_json(const json& spec) {
    std::string kind = spec.at("kind").get<std::string>();
    if (kind == "owf") {
        const json& jf = spec.at("f");
        FunctionTable f;
        f.in_bits = jf.at("in_bits").get<int>();
        f.out_bits = jf.at("out_bits").get<int>();
        for (const auto& h : jf.at("table_hex"))
            f.table.push_back(Bits::from_hex(h.get<std::string>(), f.out_bits).to_u64());
        return owf_generator(std::move(f), spec.at("n").get<int>());
    }
    if (kind == "owf-builtin") {
        int n = spec.at("n").get<int>();
        uint64_t seed = spec.value("table_seed", 0);
        return owf_generator(FunctionTable::builtin(spec.at("name").get<std::string>(), n, seed), n);
    }
    if (kind == "bit-blocks") return bit_blocks_generator(spec.at("n").get<int>());
    if (kind == "table") {
        int n = spec.at("n").get<int>();
        int seed_bits = spec.at("seed_bits").get<int>();
        std::vector<int> block_bits = spec.at("block_bits").get<std::vector<int>>();
        std::vector<std::vector<Bits>> rows;
        for (const auto& row : spec.at("rows_hex")) {
            std::vector<Bits> r;
            for (size_t i = 0; i < row.size(); ++i)
                r.push_back(Bits::from_hex(row[i].get<std::string>(), block_bits[i]));
            rows.push_back(std::move(r));
        }
        return table_generator(n, seed_bits, std::move(block_bits), std::move(rows));
    }
    if (kind == "pad-blocks")
        return pad_to_block_count(generator_from_json(spec.at("base")), spec.at("target_m").get<int>());
    if (kind == "pad-lengths") return pad_block_lengths(generator_from_json(spec.at("base")));
    if (kind == "equalize")
        return equalize(generator_from_json(spec.at("base")), spec.at("w").get<int>());
    if (kind == "product")
        return direct_product(generator_from_json(spec.at("base")), spec.at("v").get<int>());
    throw ParamError("generator_from_json: unknown kind '" + kind + "'");
}

// --- exact support ------------------------------------------------------------

OutputSupport::OutputSupport(GenPtr g, Bits z) : gen_(std::move(g)), z_(std::move(z)) {
    if (gen_->seed_bits() > 20) throw RegimeError("OutputSupport: seed space exceeds 2^20");
    if (z_.empty() && gen_->pp_bits() > 0) z_ = Bits::zeros(gen_->pp_bits());
    if (z_.size() != gen_->pp_bits()) throw ParamError("OutputSupport: public parameter width");

    uint64_t seeds = uint64_t(1) << gen_->seed_bits();
    std::vector<std::pair<std::vector<Bits>, uint64_t>> rows;
    rows.reserve(seeds);
    for (uint64_t x = 0; x < seeds; ++x)
        rows.emplace_back(gen_->eval(z_, Bits(x, gen_->seed_bits())), x);
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    for (auto& [tuple, seed] : rows) {
        if (tuples_.empty() || tuples_.back() != tuple) {
            tuples_.push_back(tuple);
            counts_.push_back(0);
            seeds_.emplace_back();
        }
        ++counts_.back();
        seeds_.back().push_back(seed);
    }
}

std::pair<size_t, size_t> OutputSupport::prefix_range(const std::vector<Bits>& prefix) const {
    auto lo = std::lower_bound(tuples_.begin(), tuples_.end(), prefix,
                               [&](const std::vector<Bits>& t, const std::vector<Bits>& p) {
                                   for (size_t i = 0; i < p.size() && i < t.size(); ++i) {
                                       if (t[i] < p[i]) return true;
                                       if (p[i] < t[i]) return false;
                                   }
                                   return false;  // t's prefix == p: not less
                               });
    auto hi = std::upper_bound(lo, tuples_.end(), prefix,
                               [&](const std::vector<Bits>& p, const std::vector<Bits>& t) {
                                   for (size_t i = 0; i < p.size() && i < t.size(); ++i) {
                                       if (p[i] < t[i]) return true;
                                       if (t[i] < p[i]) return false;
                                   }
                                   return false;  // prefix matches: not greater
                               });
    return {size_t(lo - tuples_.begin()), size_t(hi - tuples_.begin())};
}

bool OutputSupport::contains(const std::vector<Bits>& tuple) const {
    if ((int)tuple.size() != gen_->block_count()) return false;
    return std::binary_search(tuples_.begin(), tuples_.end(), tuple);
}

bool OutputSupport::contains_prefix(const std::vector<Bits>& prefix) const {
    auto [lo, hi] = prefix_range(prefix);
    return lo < hi;
}

uint64_t OutputSupport::prefix_count(const std::vector<Bits>& prefix) const {
    auto [lo, hi] = prefix_range(prefix);
    uint64_t c = 0;
    for (size_t i = lo; i < hi; ++i) c += counts_[i];
    return c;
}

std::vector<std::pair<Bits, uint64_t>> OutputSupport::next_block_counts(
    const std::vector<Bits>& prefix) const {
    if ((int)prefix.size() >= gen_->block_count() + 1)
        throw ParamError("next_block_counts: prefix too long");
    auto [lo, hi] = prefix_range(prefix);
    std::vector<std::pair<Bits, uint64_t>> out;
    size_t level = prefix.size();
    for (size_t i = lo; i < hi; ++i) {
        const Bits& y = tuples_[i][level];
        if (out.empty() || !(out.back().first == y))
            out.emplace_back(y, counts_[i]);
        else
            out.back().second += counts_[i];
    }
    return out;
}

std::vector<uint64_t> OutputSupport::consistent_seeds(const std::vector<Bits>& prefix) const {
    auto [lo, hi] = prefix_range(prefix);
    std::vector<uint64_t> out;
    for (size_t i = lo; i < hi; ++i) out.insert(out.end(), seeds_[i].begin(), seeds_[i].end());
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<uint64_t> OutputSupport::sample_consistent_seed(const std::vector<Bits>& prefix,
                                                              SeedStream& rng) const {
    auto [lo, hi] = prefix_range(prefix);
    uint64_t total = 0;
    for (size_t i = lo; i < hi; ++i) total += counts_[i];
    if (total == 0) return std::nullopt;
    uint64_t pick = rng.below(total);
    for (size_t i = lo; i < hi; ++i) {
        if (pick < counts_[i]) return seeds_[i][pick];
        pick -= counts_[i];
    }
    return std::nullopt;  // unreachable
}

double OutputSupport::real_sample_entropy(const std::vector<Bits>& prefix) const {
    double sum = 0.0;
    std::vector<Bits> cur;
    uint64_t prev = prefix_count(cur);
    for (const Bits& y : prefix) {
        cur.push_back(y);
        uint64_t c = prefix_count(cur);
        if (c == 0) return std::numeric_limits<double>::infinity();
        sum += std::log2(double(prev)) - std::log2(double(c));
        prev = c;
    }
    return sum;
}

double OutputSupport::real_shannon_entropy() const {
    double total = double(seed_count());
    double h = 0.0;
    for (uint64_t c : counts_) h += (double(c) / total) * std::log2(total / double(c));
    return h;
}

double OutputSupport::block_conditional_shannon(int i) const {
    if (i < 0 || i >= gen_->block_count()) throw ParamError("block index out of range");
    // H(Y_i | Y_<i) = H(Y_<=i) - H(Y_<i), grouped directly off the sorted table.
    auto level_entropy = [&](int upto) {
        double total = double(seed_count());
        double h = 0.0;
        size_t k = 0;
        while (k < tuples_.size()) {
            uint64_t group = counts_[k];
            size_t j = k + 1;
            while (j < tuples_.size() &&
                   std::equal(tuples_[j].begin(), tuples_[j].begin() + upto, tuples_[k].begin()))
                group += counts_[j++];
            h += (double(group) / total) * std::log2(total / double(group));
            k = j;
        }
        return h;
    };
    return level_entropy(i + 1) - level_entropy(i);
}

double OutputSupport::block_conditional_min_entropy(int i) const {
    if (i < 0 || i >= gen_->block_count()) throw ParamError("block index out of range");
    double best = std::numeric_limits<double>::infinity();
    size_t k = 0;
    while (k < tuples_.size()) {
        // group = all tuples sharing the first i blocks
        size_t j = k;
        uint64_t group = 0;
        while (j < tuples_.size() &&
               std::equal(tuples_[j].begin(), tuples_[j].begin() + i, tuples_[k].begin()))
            group += counts_[j++];
        // inside the group, find the heaviest value of block i
        size_t a = k;
        while (a < j) {
            size_t b = a;
            uint64_t value = 0;
            while (b < j && tuples_[b][i] == tuples_[a][i]) value += counts_[b++];
            double h = std::log2(double(group)) - std::log2(double(value));
            best = std::min(best, h);
            a = b;
        }
        k = j;
    }
    return best;
}

double OutputSupport::tuple_min_entropy() const {
    uint64_t maxc = 0;
    for (uint64_t c : counts_) maxc = std::max(maxc, c);
    return std::log2(double(seed_count())) - std::log2(double(maxc));
}

JointDistribution OutputSupport::to_joint() const {
    std::vector<int> schema;
    for (int b : gen_->block_bits()) schema.push_back(2 + (b + 7) / 8);  // Bits::key width
    std::vector<std::pair<std::string, uint64_t>> counts;
    counts.reserve(tuples_.size());
    for (size_t i = 0; i < tuples_.size(); ++i) {
        std::string packed;
        for (const Bits& y : tuples_[i]) packed += y.key();
        counts.emplace_back(packed, counts_[i]);
    }
    return JointDistribution(Distribution::from_counts(counts), schema);
}

SupportPtr shared_support(GenPtr g, Bits z) {
    return std::make_shared<OutputSupport>(std::move(g), std::move(z));
}

}  // namespace ef
