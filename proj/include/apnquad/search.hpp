// search.hpp
//
// The enumeration engine and external surface: sharded, checkpointable scans
// of the coefficient space under either a1-domain convention, the
// theorem-vs-decider cross-validation harness, Walsh/differential spectra,
// and invariant bucketing of APN triples.  Reports serialize to JSON,
// coefficient dumps to CSV, both with the field module's hex encodings.

#pragma once

#include "apnquad/apncore.hpp"
#include "apnquad/characterize.hpp"
#include "apnquad/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace apnquad {

enum class A1Domain { Subfield, Full };
enum class Method { Theorem, BruteForce, Both };

inline const char* to_string(A1Domain d) { return d == A1Domain::Subfield ? "subfield" : "full"; }
inline const char* to_string(Method m) {
    switch (m) {
    case Method::Theorem: return "theorem";
    case Method::BruteForce: return "bruteforce";
    default: return "both";
    }
}

inline A1Domain a1_domain_from_string(const std::string& s) {
    if (s == "subfield")
        return A1Domain::Subfield;
    if (s == "full")
        return A1Domain::Full;
    throw std::invalid_argument("unknown a1 domain '" + s + "'");
}

inline Method method_from_string(const std::string& s) {
    if (s == "theorem")
        return Method::Theorem;
    if (s == "bruteforce")
        return Method::BruteForce;
    if (s == "both")
        return Method::Both;
    throw std::invalid_argument("unknown method '" + s + "'");
}

struct SearchSpec {
    int m = 4;
    A1Domain a1_domain = A1Domain::Subfield;
    Method method = Method::Theorem;
    int shards = 1;
    int shard_index = -1; // -1 = run every shard
    std::string checkpoint_path;
    std::string dump_path;
    bool force = false;
    unsigned threads = 0;
};

struct ShardEntry {
    int shard = 0;
    std::uint64_t total = 0;
    std::uint64_t apn_count = 0;
    bool done = false;
};

struct MismatchEntry {
    CoeffTriple triple;
    bool theorem_apn = false;
    bool brute_apn = false;
};

struct SearchReport {
    SearchSpec spec;
    std::uint64_t total_checked = 0;
    std::uint64_t apn_count = 0;
    std::vector<MismatchEntry> mismatches;
    std::vector<ShardEntry> shards;
    double elapsed_seconds = 0;
    bool out_of_theorem_range = false; // m < 4: theorem applied for comparison only
};

inline nlohmann::ordered_json report_to_json(const SearchReport& r) {
    nlohmann::ordered_json j;
    j["spec"] = {{"m", r.spec.m},
                 {"a1_domain", to_string(r.spec.a1_domain)},
                 {"method", to_string(r.spec.method)},
                 {"shards", r.spec.shards},
                 {"shard_index", r.spec.shard_index}};
    j["total_checked"] = r.total_checked;
    j["apn_count"] = r.apn_count;
    j["out_of_theorem_range"] = r.out_of_theorem_range;
    auto mm = nlohmann::ordered_json::array();
    for (const auto& e : r.mismatches)
        mm.push_back({{"a1", FieldCtx::enc(e.triple.a1)},
                      {"a2", FieldCtx::enc(e.triple.a2)},
                      {"a3", FieldCtx::enc(e.triple.a3)},
                      {"theorem", e.theorem_apn},
                      {"bruteforce", e.brute_apn}});
    j["mismatches"] = std::move(mm);
    auto sh = nlohmann::ordered_json::array();
    for (const auto& s : r.shards)
        sh.push_back({{"shard", s.shard}, {"total", s.total}, {"apn_count", s.apn_count}, {"done", s.done}});
    j["shards"] = std::move(sh);
    j["elapsed_seconds"] = r.elapsed_seconds;
    return j;
}

namespace detail {

struct DumpRow {
    CoeffTriple triple;
    bool theorem = false, g1 = false, g2 = false;
};

inline std::string dump_row_csv(int m, const DumpRow& r) {
    std::ostringstream os;
    os << m << ',' << FieldCtx::enc(FldElt(r.triple.a1.x2)) << ',' << FieldCtx::enc(r.triple.a2)
       << ',' << FieldCtx::enc(r.triple.a3) << ',' << (r.theorem ? 1 : 0) << ',' << (r.g1 ? 1 : 0)
       << ',' << (r.g2 ? 1 : 0);
    return os.str();
}

// atomic file replace: write whole content to <path>.tmp, then rename
inline void atomic_write(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

inline std::string shard_fragment_path(const std::string& dump, int shard) {
    return dump + ".shard" + std::to_string(shard);
}

} // namespace detail

// Iterates every triple of one shard (a2 packed value congruent to the shard
// index modulo the shard count), deciding each by the requested method.
// Returns the shard ledger entry plus positives and mismatches.
struct ShardOutcome {
    ShardEntry entry;
    std::vector<detail::DumpRow> positives;
    std::vector<MismatchEntry> mismatches;
};

inline ShardOutcome run_shard(const FieldCtx& F, const SearchSpec& spec, int shard,
                              const FamilyApnEngine* engine,
                              const std::function<void(int, const CoeffTriple&)>* visit_hook) {
    const std::uint32_t sub = F.field_size(), full = F.tower_size();
    ShardOutcome out;
    out.entry.shard = shard;
    const bool want_dump = !spec.dump_path.empty();
    const bool theorem_on = spec.method != Method::BruteForce;
    const bool brute_on = spec.method != Method::Theorem;

    auto decide = [&](const CoeffTriple& c) {
        bool th = false, br = false;
        if (theorem_on)
            th = theorem_verdict(F, c);
        if (brute_on)
            br = engine->is_apn(c).first;
        bool apn = spec.method == Method::Theorem   ? th
                   : spec.method == Method::BruteForce ? br
                                                       : (th && br);
        if (spec.method == Method::Both && th != br)
            out.mismatches.push_back({c, th, br});
        out.entry.apn_count += apn;
        ++out.entry.total;
        if (want_dump && apn) {
            GammaVerdict v = gamma_verdict(F, thetas(F, c));
            out.positives.push_back({c, th, v.in_gamma1, v.in_gamma2});
        }
    };

    for (std::uint32_t a2 = std::uint32_t(shard); a2 < full; a2 += std::uint32_t(spec.shards)) {
        TowerElt a2e = F.unpack(a2);
        if (spec.a1_domain == A1Domain::Subfield) {
            for (std::uint32_t a1 = 0; a1 < sub; ++a1)
                for (std::uint32_t a3 = 0; a3 < full; ++a3) {
                    CoeffTriple c = CoeffTriple::subfield(FldElt(a1), a2e, F.unpack(a3));
                    if (visit_hook)
                        (*visit_hook)(shard, c);
                    decide(c);
                }
        } else {
            for (std::uint32_t a1 = 0; a1 < full; ++a1) {
                // normalize once per a1: the (a2, a3) sweep then maps through
                // fixed multipliers r^2, r^3 with r = b / bar(b)
                CoeffTriple base{F.unpack(a1), {0, 0}, {0, 0}, false};
                auto [nbase, b] = normalize_a1(F, base);
                TowerElt r = b.is_zero() ? FieldCtx::one() : F.tdiv(b, FieldCtx::bar(b));
                TowerElt r2 = F.tsqr(r);
                TowerElt r3 = F.tmul(r2, r);
                TowerElt a2n = F.tmul(a2e, r2);
                for (std::uint32_t a3 = 0; a3 < full; ++a3) {
                    CoeffTriple c{nbase.a1, a2n, F.tmul(F.unpack(a3), r3), true};
                    if (visit_hook)
                        (*visit_hook)(shard, c);
                    decide(c);
                }
            }
        }
    }
    out.entry.done = true;
    return out;
}

inline SearchReport enumerate(const FieldCtx& F, const SearchSpec& spec,
                              const std::function<void(int, const CoeffTriple&)>* visit_hook = nullptr) {
    if (spec.m != F.m())
        throw std::invalid_argument("spec.m does not match the field context");
    if (spec.shards < 1)
        throw std::invalid_argument("shards must be >= 1");
    if (spec.shard_index >= spec.shards)
        throw std::invalid_argument("shard index out of range");
    // cost guards: keep default runs desk scale
    if (!spec.force) {
        if (spec.method != Method::Theorem && F.m() > 5)
            throw std::invalid_argument("brute-force methods need --force above m=5");
        if (F.m() > 8)
            throw std::invalid_argument("enumeration needs --force above m=8");
    }

    auto t0 = std::chrono::steady_clock::now();
    nlohmann::ordered_json spec_echo = {{"m", spec.m},
                                        {"a1_domain", to_string(spec.a1_domain)},
                                        {"method", to_string(spec.method)},
                                        {"shards", spec.shards}};

    // load checkpoint: header line echoes the spec, then one ledger line per shard
    std::map<int, ShardEntry> done_shards;
    if (!spec.checkpoint_path.empty()) {
        std::ifstream in(spec.checkpoint_path);
        if (in) {
            std::string line;
            if (std::getline(in, line)) {
                auto hdr = nlohmann::json::parse(line);
                if (hdr.value("spec", nlohmann::json()) != nlohmann::json(spec_echo))
                    throw std::invalid_argument("checkpoint was written by a different spec");
            }
            while (std::getline(in, line)) {
                if (line.empty())
                    continue;
                auto j = nlohmann::json::parse(line);
                ShardEntry e{j.at("shard").get<int>(), j.at("total").get<std::uint64_t>(),
                             j.at("apn_count").get<std::uint64_t>(), j.at("done").get<bool>()};
                if (e.done)
                    done_shards[e.shard] = e;
            }
        }
    }
    if (!spec.dump_path.empty())
        for (const auto& [s, e] : done_shards)
            if (!std::ifstream(detail::shard_fragment_path(spec.dump_path, s)))
                throw std::invalid_argument("checkpoint shard " + std::to_string(s) +
                                            " lacks its dump fragment; rerun without checkpoint");

    std::vector<int> todo;
    for (int s = 0; s < spec.shards; ++s) {
        if (spec.shard_index >= 0 && s != spec.shard_index)
            continue;
        if (!done_shards.count(s))
            todo.push_back(s);
    }

    std::map<int, ShardEntry> ledger = done_shards;
    std::vector<MismatchEntry> mismatches;
    std::mutex mtx; // guards ledger, mismatches, checkpoint writes

    auto write_checkpoint = [&]() {
        if (spec.checkpoint_path.empty())
            return;
        std::ostringstream os;
        os << nlohmann::ordered_json({{"spec", spec_echo}}).dump() << '\n';
        for (const auto& [s, e] : ledger)
            os << nlohmann::ordered_json({{"shard", e.shard},
                                          {"total", e.total},
                                          {"apn_count", e.apn_count},
                                          {"done", e.done}})
                      .dump()
               << '\n';
        detail::atomic_write(spec.checkpoint_path, os.str());
    };

    std::optional<FamilyApnEngine> engine;
    if (spec.method != Method::Theorem)
        engine.emplace(F);

    parallel_chunks(
        0, todo.size(),
        [&](unsigned, std::uint64_t lo, std::uint64_t hi) {
            for (std::uint64_t i = lo; i < hi; ++i) {
                int s = todo[i];
                ShardOutcome out = run_shard(F, spec, s, engine ? &*engine : nullptr, visit_hook);
                std::lock_guard<std::mutex> g(mtx);
                ledger[s] = out.entry;
                for (auto& mm : out.mismatches)
                    if (mismatches.size() < 10000)
                        mismatches.push_back(mm);
                if (!spec.dump_path.empty()) {
                    std::ostringstream os;
                    for (const auto& row : out.positives)
                        os << detail::dump_row_csv(F.m(), row) << '\n';
                    detail::atomic_write(detail::shard_fragment_path(spec.dump_path, s), os.str());
                }
                write_checkpoint();
            }
        },
        spec.threads);

    SearchReport rep;
    rep.spec = spec;
    rep.out_of_theorem_range = F.m() < 4;
    for (const auto& [s, e] : ledger) {
        rep.total_checked += e.total;
        rep.apn_count += e.apn_count;
        rep.shards.push_back(e);
    }
    rep.mismatches = std::move(mismatches);

    // assemble the final dump once every shard is present
    if (!spec.dump_path.empty() && int(ledger.size()) == spec.shards) {
        std::ostringstream os;
        os << "m,a1,a2,a3,theorem,gamma1,gamma2\n";
        for (int s = 0; s < spec.shards; ++s) {
            std::ifstream frag(detail::shard_fragment_path(spec.dump_path, s));
            os << frag.rdbuf();
        }
        detail::atomic_write(spec.dump_path, os.str());
        for (int s = 0; s < spec.shards; ++s)
            std::remove(detail::shard_fragment_path(spec.dump_path, s).c_str());
    }

    rep.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// Cross-validation harness.  m <= 4: exhaustive theorem-vs-decider compare.
// m = 5: theorem scan; every positive is brute-force confirmed APN and
// confirmed not a permutation; sample_size random negatives are brute-force
// confirmed non-APN.  m = 3 reports the agreement rate without asserting.
struct CrosscheckReport {
    int m = 0;
    std::uint64_t total = 0;
    std::uint64_t theorem_positives = 0;
    std::uint64_t verdict_mismatches = 0;   // theorem vs kernel decider
    std::uint64_t brute_mismatches = 0;     // kernel decider vs table brute force
    std::uint64_t permutation_positives = 0; // APN triples that permute (must stay 0)
    std::uint64_t negatives_sampled = 0;
    bool out_of_theorem_range = false;
    double elapsed_seconds = 0;

    bool passed() const {
        return (out_of_theorem_range || verdict_mismatches == 0) && brute_mismatches == 0 &&
               permutation_positives == 0;
    }
};

inline nlohmann::ordered_json crosscheck_to_json(const CrosscheckReport& r) {
    return {{"m", r.m},
            {"total", r.total},
            {"theorem_positives", r.theorem_positives},
            {"verdict_mismatches", r.verdict_mismatches},
            {"brute_mismatches", r.brute_mismatches},
            {"permutation_positives", r.permutation_positives},
            {"negatives_sampled", r.negatives_sampled},
            {"out_of_theorem_range", r.out_of_theorem_range},
            {"agreement_rate",
             r.total ? 1.0 - double(r.verdict_mismatches) / double(r.total) : 1.0},
            {"elapsed_seconds", r.elapsed_seconds}};
}

inline CrosscheckReport crosscheck(const FieldCtx& F, std::uint64_t sample_size = 4096,
                                   std::uint64_t seed = 1, unsigned threads = 0) {
    if (F.m() > 5)
        throw std::invalid_argument("crosscheck is a desk-scale tool (m <= 5)");
    auto t0 = std::chrono::steady_clock::now();
    CrosscheckReport rep;
    rep.m = F.m();
    rep.out_of_theorem_range = F.m() < 4;
    const std::uint32_t sub = F.field_size(), full = F.tower_size();

    if (F.m() <= 4) {
        std::mutex mtx;
        parallel_chunks(
            0, sub,
            [&](unsigned, std::uint64_t lo, std::uint64_t hi) {
                FamilyApnEngine eng(F);
                CrosscheckReport local;
                for (std::uint64_t a1 = lo; a1 < hi; ++a1)
                    for (std::uint32_t a2 = 0; a2 < full; ++a2)
                        for (std::uint32_t a3 = 0; a3 < full; ++a3) {
                            CoeffTriple c = CoeffTriple::subfield(FldElt(a1), F.unpack(a2), F.unpack(a3));
                            bool th = theorem_verdict(F, c);
                            bool fam = eng.is_apn(c).first;
                            ++local.total;
                            local.theorem_positives += th;
                            local.verdict_mismatches += th != fam;
                            if (fam) {
                                FuncTable tab = make_family_table(F, c);
                                local.brute_mismatches += !is_apn_bruteforce(tab);
                                local.permutation_positives += is_permutation(tab);
                            }
                        }
                std::lock_guard<std::mutex> g(mtx);
                rep.total += local.total;
                rep.theorem_positives += local.theorem_positives;
                rep.verdict_mismatches += local.verdict_mismatches;
                rep.brute_mismatches += local.brute_mismatches;
                rep.permutation_positives += local.permutation_positives;
            },
            threads);
    } else {
        // pass 1: theorem scan collecting positives
        std::mutex mtx;
        std::vector<CoeffTriple> positives;
        parallel_chunks(
            0, sub,
            [&](unsigned, std::uint64_t lo, std::uint64_t hi) {
                std::vector<CoeffTriple> local;
                std::uint64_t tot = 0;
                for (std::uint64_t a1 = lo; a1 < hi; ++a1)
                    for (std::uint32_t a2 = 0; a2 < full; ++a2)
                        for (std::uint32_t a3 = 0; a3 < full; ++a3) {
                            CoeffTriple c = CoeffTriple::subfield(FldElt(a1), F.unpack(a2), F.unpack(a3));
                            ++tot;
                            if (theorem_verdict(F, c))
                                local.push_back(c);
                        }
                std::lock_guard<std::mutex> g(mtx);
                rep.total += tot;
                positives.insert(positives.end(), local.begin(), local.end());
            },
            threads);
        rep.theorem_positives = positives.size();

        // pass 2: confirm every positive by kernel decider and brute force
        parallel_chunks(
            0, positives.size(),
            [&](unsigned, std::uint64_t lo, std::uint64_t hi) {
                FamilyApnEngine eng(F);
                CrosscheckReport local;
                for (std::uint64_t i = lo; i < hi; ++i) {
                    const CoeffTriple& c = positives[i];
                    bool fam = eng.is_apn(c).first;
                    local.verdict_mismatches += !fam;
                    FuncTable tab = make_family_table(F, c);
                    local.brute_mismatches += is_apn_bruteforce(tab) != fam;
                    local.permutation_positives += is_permutation(tab);
                }
                std::lock_guard<std::mutex> g(mtx);
                rep.verdict_mismatches += local.verdict_mismatches;
                rep.brute_mismatches += local.brute_mismatches;
                rep.permutation_positives += local.permutation_positives;
            },
            threads);

        // pass 3: sampled negatives
        parallel_chunks(
            0, sample_size,
            [&](unsigned w, std::uint64_t lo, std::uint64_t hi) {
                FamilyApnEngine eng(F);
                SplitMix64 rng(seed * 0x9e3779b9u + w + 1);
                CrosscheckReport local;
                for (std::uint64_t i = lo; i < hi; ++i) {
                    CoeffTriple c = CoeffTriple::subfield(FldElt(rng.below(sub)),
                                                          F.unpack(std::uint32_t(rng.below(full))),
                                                          F.unpack(std::uint32_t(rng.below(full))));
                    if (theorem_verdict(F, c))
                        continue; // negatives only
                    ++local.negatives_sampled;
                    bool fam = eng.is_apn(c).first;
                    local.verdict_mismatches += fam;
                    if (fam != is_apn_bruteforce(make_family_table(F, c)))
                        ++local.brute_mismatches;
                }
                std::lock_guard<std::mutex> g(mtx);
                rep.negatives_sampled += local.negatives_sampled;
                rep.verdict_mismatches += local.verdict_mismatches;
                rep.brute_mismatches += local.brute_mismatches;
            },
            threads);
    }
    rep.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// Walsh transform W(a,b) = sum_x (-1)^{tr(b F(x) + a x)} per nonzero b, fast
// transform over a GF(2)-dual indexing (same multiset as over a itself).
struct SpectrumRecord {
    std::map<int, std::uint64_t> diff_spectrum;
    std::map<std::uint64_t, std::uint64_t> walsh_abs; // |W| -> multiplicity, b != 0
    bool plateaued = true; // each component's nonzero |W| constant
};

inline SpectrumRecord walsh_spectrum(const FieldCtx& F, const FuncTable& f, unsigned threads = 0) {
    if (f.n > 14)
        throw std::invalid_argument("walsh_spectrum is limited to n <= 14");
    const std::size_t sz = f.values.size();
    SpectrumRecord rec;
    rec.diff_spectrum = differential_uniformity(f).spectrum;

    std::mutex mtx;
    parallel_chunks(
        1, sz,
        [&](unsigned, std::uint64_t blo, std::uint64_t bhi) {
            std::vector<std::int32_t> w(sz);
            std::map<std::uint64_t, std::uint64_t> local;
            bool local_plateaued = true;
            for (std::uint64_t b = blo; b < bhi; ++b) {
                TowerElt be = F.unpack(std::uint32_t(b));
                for (std::size_t x = 0; x < sz; ++x) {
                    int bit = F.tr_n(F.tmul(be, F.unpack(f.values[x])));
                    w[x] = bit ? -1 : 1;
                }
                // in-place fast Walsh-Hadamard over the x index
                for (std::size_t step = 1; step < sz; step <<= 1)
                    for (std::size_t i = 0; i < sz; i += step << 1)
                        for (std::size_t j = i; j < i + step; ++j) {
                            std::int32_t u = w[j], v = w[j + step];
                            w[j] = u + v;
                            w[j + step] = u - v;
                        }
                std::int64_t parseval = 0;
                std::uint64_t nonzero_abs = 0;
                for (std::size_t a = 0; a < sz; ++a) {
                    std::uint64_t av = std::uint64_t(w[a] < 0 ? -w[a] : w[a]);
                    parseval += std::int64_t(w[a]) * w[a];
                    ++local[av];
                    if (av != 0) {
                        if (nonzero_abs == 0)
                            nonzero_abs = av;
                        else if (nonzero_abs != av)
                            local_plateaued = false;
                    }
                }
                if (parseval != std::int64_t(sz) * std::int64_t(sz))
                    throw std::logic_error("Parseval identity violated in walsh_spectrum");
            }
            std::lock_guard<std::mutex> g(mtx);
            for (auto [v, c] : local)
                rec.walsh_abs[v] += c;
            rec.plateaued = rec.plateaued && local_plateaued;
        },
        threads);
    return rec;
}

// Bucket APN triples by (differential spectrum, extended Walsh spectrum).
// Equal invariants are necessary, not sufficient, for CCZ equivalence, so the
// bucket count is a lower bound on the class count.
struct InvariantBucket {
    std::string key;
    std::vector<CoeffTriple> members;
};

inline std::string spectrum_key(const SpectrumRecord& rec) {
    std::ostringstream os;
    os << "d:";
    for (auto [c, mult] : rec.diff_spectrum)
        if (c)
            os << c << 'x' << mult << ';';
    os << "|w:";
    for (auto [v, mult] : rec.walsh_abs)
        os << v << 'x' << mult << ';';
    return os.str();
}

inline std::vector<InvariantBucket> classify(const FieldCtx& F, const std::vector<CoeffTriple>& apn_list,
                                             unsigned threads = 0) {
    std::map<std::string, std::vector<CoeffTriple>> buckets;
    std::mutex mtx;
    parallel_chunks(
        0, apn_list.size(),
        [&](unsigned, std::uint64_t lo, std::uint64_t hi) {
            for (std::uint64_t i = lo; i < hi; ++i) {
                // single-threaded spectra: the outer loop owns the parallelism
                std::string key =
                    spectrum_key(walsh_spectrum(F, make_family_table(F, apn_list[i]), 1));
                std::lock_guard<std::mutex> g(mtx);
                buckets[key].push_back(apn_list[i]);
            }
        },
        threads);
    std::vector<InvariantBucket> out;
    for (auto& [k, v] : buckets) {
        std::sort(v.begin(), v.end(), [&](const CoeffTriple& a, const CoeffTriple& b) {
            auto ka = std::tuple(F.pack(a.a1), F.pack(a.a2), F.pack(a.a3));
            auto kb = std::tuple(F.pack(b.a1), F.pack(b.a2), F.pack(b.a3));
            return ka < kb;
        });
        out.push_back({k, std::move(v)});
    }
    return out;
}

} // namespace apnquad
