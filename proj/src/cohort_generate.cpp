#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "fedtrial/cohort.hpp"
#include "fedtrial/errors.hpp"
#include "fedtrial/nn.hpp"
#include "fedtrial/parallel.hpp"
#include "fedtrial/rng.hpp"

namespace fedtrial {

namespace {

std::string padded(const char* prefix, int value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, value);
    return buf;
}

constexpr int kIndexDayMin = 120;
constexpr int kIndexDayMax = 400;
constexpr double kErRate = 0.12;
constexpr double kLateEventRate = 0.05;
constexpr int kMaxPostVisits = 3;

}  // namespace

const std::set<Code>& default_tf_codes() {
    static const std::set<Code> codes = {{CodeSystem::Diagnosis, "D_TF_STROKE"},
                                         {CodeSystem::Diagnosis, "D_TF_MI"},
                                         {CodeSystem::Diagnosis, "D_TF_STENT_THROMBOSIS"},
                                         {CodeSystem::Diagnosis, "D_TF_RETHROMBOSIS"}};
    return codes;
}

const std::set<Code>& default_clopidogrel_codes() {
    static const std::set<Code> codes = {{CodeSystem::Prescription, "RX_CLOPIDOGREL"}};
    return codes;
}

const Code& risk_anchor_code() {
    static const Code code{CodeSystem::Diagnosis, "D_RISK_00"};
    return code;
}

const Code& mitigator_code() {
    static const Code code{CodeSystem::Prescription, "RX_MITIGATOR"};
    return code;
}

void GeneratorConfig::validate() const {
    if (n_patients < 1)
        throw ConfigError("generator: n_patients must be >= 1");
    if (n_centers < 1)
        throw ConfigError("generator: n_centers must be >= 1");
    if (n_patients < n_centers)
        throw ConfigError("generator: need at least one patient per center");
    if (!(center_decay > 0.0 && center_decay < 1.0))
        throw ConfigError("generator: center_decay must lie in (0, 1)");
    if (!(target_tf_fraction > 0.0 && target_tf_fraction < 1.0))
        throw ConfigError("generator: target_tf_fraction must lie in (0, 1)");
    if (!(target_excluded_fraction > 0.0 && target_excluded_fraction < 1.0))
        throw ConfigError("generator: target_excluded_fraction must lie in (0, 1)");
    if (n_diagnosis_codes < 1 || n_procedure_codes < 1 || n_prescription_codes < 1)
        throw ConfigError("generator: per-system vocabulary sizes must be >= 1");
    if (n_risk_codes < 1 || n_risk_codes > 64)
        throw ConfigError("generator: n_risk_codes must lie in [1, 64]");
    if (!(zipf_alpha > 0.0))
        throw ConfigError("generator: zipf_alpha must be positive");
    if (!(mixture_strength >= 0.0 && mixture_strength <= 1.0))
        throw ConfigError("generator: mixture_strength must lie in [0, 1]");
    if (!(risk_boost > 0.0))
        throw ConfigError("generator: risk_boost must be positive");
    if (!(risk_weight_low <= risk_weight_high))
        throw ConfigError("generator: risk weight range is inverted");
    if (order_effect < 0.0)
        throw ConfigError("generator: order_effect must be non-negative");
    if (!(pair_rate >= 0.0 && pair_rate <= 1.0))
        throw ConfigError("generator: pair_rate must lie in [0, 1]");
    if (min_visits < 1 || max_visits < min_visits)
        throw ConfigError("generator: visit count range is invalid");
    if (min_codes_per_visit < 1 || max_codes_per_visit < min_codes_per_visit)
        throw ConfigError("generator: codes-per-visit range is invalid");
}

namespace {

std::vector<int> center_sizes(const GeneratorConfig& cfg) {
    const int C = cfg.n_centers;
    std::vector<double> weight(C);
    double total = 0.0;
    for (int c = 0; c < C; ++c) {
        weight[c] = std::pow(cfg.center_decay, c);
        total += weight[c];
    }
    std::vector<int> sizes(C);
    std::vector<std::pair<double, int>> remainders(C);
    long long assigned = 0;
    for (int c = 0; c < C; ++c) {
        const double quota = cfg.n_patients * weight[c] / total;
        sizes[c] = static_cast<int>(std::floor(quota));
        assigned += sizes[c];
        remainders[c] = {quota - std::floor(quota), c};
    }
    // Largest remainders absorb the leftover, ties to the smaller index.
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first)
            return a.first > b.first;
        return a.second < b.second;
    });
    long long leftover = cfg.n_patients - assigned;
    for (long long i = 0; i < leftover; ++i)
        sizes[remainders[static_cast<std::size_t>(i)].second] += 1;
    for (int c = 0; c < C; ++c)
        if (sizes[c] < 1)
            throw ConfigError("generator: size schedule leaves center " + std::to_string(c + 1) +
                              " empty; adjust center_decay or n_patients");
    return sizes;
}

struct CodePool {
    std::vector<Code> codes;
    std::vector<std::size_t> risk_rows;  // positions of the risk codes in `codes`
};

CodePool build_pool(const GeneratorConfig& cfg) {
    CodePool pool;
    for (int i = 0; i < cfg.n_diagnosis_codes; ++i)
        pool.codes.push_back({CodeSystem::Diagnosis, padded("D_", i, 3)});
    for (int i = 0; i < cfg.n_risk_codes; ++i) {
        pool.risk_rows.push_back(pool.codes.size());
        pool.codes.push_back({CodeSystem::Diagnosis, padded("D_RISK_", i, 2)});
    }
    for (int i = 0; i < cfg.n_procedure_codes; ++i)
        pool.codes.push_back({CodeSystem::Procedure, padded("P_", i, 3)});
    for (int i = 0; i < cfg.n_prescription_codes; ++i)
        pool.codes.push_back({CodeSystem::Prescription, padded("RX_", i, 3)});
    return pool;
}

// Center mixture = blend of a shared popularity curve and a center-permuted
// one; risk codes get a sampling boost so their presence rates stay usable.
std::vector<std::vector<double>> center_cdfs(const GeneratorConfig& cfg, const CodePool& pool) {
    const std::size_t M = pool.codes.size();
    std::vector<double> global(M);
    for (std::size_t j = 0; j < M; ++j)
        global[j] = 1.0 / std::pow(static_cast<double>(j + 1), cfg.zipf_alpha);

    std::vector<bool> is_risk(M, false);
    for (std::size_t r : pool.risk_rows)
        is_risk[r] = true;

    std::vector<std::vector<double>> cdfs(static_cast<std::size_t>(cfg.n_centers));
    for (int c = 1; c <= cfg.n_centers; ++c) {
        std::vector<std::size_t> perm(M);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        Rng rng(derive_seed({cfg.seed, seed_tag::kMixture, static_cast<std::uint64_t>(c)}));
        rng.shuffle(perm);
        auto& cdf = cdfs[static_cast<std::size_t>(c - 1)];
        cdf.resize(M);
        double cum = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
            double w = (1.0 - cfg.mixture_strength) * global[j] + cfg.mixture_strength * global[perm[j]];
            if (is_risk[j])
                w *= cfg.risk_boost;
            cum += w;
            cdf[j] = cum;
        }
        for (double& v : cdf)
            v /= cum;
        cdf.back() = 1.0;
    }
    return cdfs;
}

std::size_t sample_code(const std::vector<double>& cdf, Rng& rng) {
    const double u = rng.unit();
    return static_cast<std::size_t>(
        std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

enum class Flavor { Labeled, EarlyEvent, NoPrescription, BadDates };

struct Draft {
    std::vector<Visit> pre;
    int index_day = 0;
    double risk_raw = 0.0;
    Flavor flavor = Flavor::Labeled;
};

}  // namespace

std::vector<PatientRecord> generate_cohort(const GeneratorConfig& cfg) {
    cfg.validate();
    const std::vector<int> sizes = center_sizes(cfg);
    const CodePool pool = build_pool(cfg);
    const auto cdfs = center_cdfs(cfg, pool);

    std::vector<int> center_of(static_cast<std::size_t>(cfg.n_patients));
    {
        std::size_t i = 0;
        for (int c = 0; c < cfg.n_centers; ++c)
            for (int k = 0; k < sizes[static_cast<std::size_t>(c)]; ++k)
                center_of[i++] = c + 1;
    }

    std::vector<double> risk_weight(static_cast<std::size_t>(cfg.n_risk_codes));
    {
        Rng rng(derive_seed({cfg.seed, seed_tag::kRiskWeights}));
        for (double& w : risk_weight)
            w = rng.uniform(cfg.risk_weight_low, cfg.risk_weight_high);
    }

    std::map<Code, std::size_t> risk_index;
    for (std::size_t k = 0; k < pool.risk_rows.size(); ++k)
        risk_index.emplace(pool.codes[pool.risk_rows[k]], k);

    const auto n = static_cast<std::size_t>(cfg.n_patients);
    std::vector<Draft> drafts(n);

    parallel_for(n, Exec::Parallel, [&](std::size_t i) {
        Draft& d = drafts[i];
        Rng rng(derive_seed({cfg.seed, seed_tag::kPatient, static_cast<std::uint64_t>(i)}));
        const auto& cdf = cdfs[static_cast<std::size_t>(center_of[i] - 1)];

        const int nv = rng.uniform_int(cfg.min_visits, cfg.max_visits);
        d.index_day = rng.uniform_int(kIndexDayMin, kIndexDayMax);
        std::vector<int> days(static_cast<std::size_t>(nv));
        for (int& day : days)
            day = rng.uniform_int(0, d.index_day - 1);
        std::sort(days.begin(), days.end());

        d.pre.resize(days.size());
        for (std::size_t v = 0; v < days.size(); ++v) {
            Visit& visit = d.pre[v];
            visit.day = days[v];
            visit.er = rng.bernoulli(kErRate);
            const int nc = rng.uniform_int(cfg.min_codes_per_visit, cfg.max_codes_per_visit);
            for (int k = 0; k < nc; ++k)
                visit.codes.push_back(pool.codes[sample_code(cdf, rng)]);
        }

        // The temporal pair: anchor then mitigator lowers risk, the reverse
        // order raises it by the same amount, so having both codes carries no
        // signal on its own. Multi-hot features cannot see the difference.
        bool paired = false;
        bool oriented = false;
        if (days.size() >= 2 && rng.bernoulli(cfg.pair_rate)) {
            std::size_t a = 0, b = 0;
            for (int attempt = 0; attempt < 16; ++attempt) {
                a = rng.bounded(days.size());
                b = rng.bounded(days.size());
                if (days[a] != days[b])
                    break;
            }
            if (days[a] != days[b]) {
                const std::size_t lo = days[a] < days[b] ? a : b;
                const std::size_t hi = days[a] < days[b] ? b : a;
                paired = true;
                oriented = rng.bernoulli(0.5);
                d.pre[oriented ? lo : hi].codes.push_back(risk_anchor_code());
                d.pre[oriented ? hi : lo].codes.push_back(mitigator_code());
            }
        }

        std::uint64_t present = 0;
        for (const Visit& visit : d.pre)
            for (const Code& c : visit.codes) {
                const auto it = risk_index.find(c);
                if (it != risk_index.end())
                    present |= std::uint64_t{1} << it->second;
            }
        d.risk_raw = 0.0;
        for (std::size_t k = 0; k < risk_weight.size(); ++k)
            if (present & (std::uint64_t{1} << k))
                d.risk_raw += risk_weight[k];
        if (paired)
            d.risk_raw += oriented ? -0.5 * cfg.order_effect : 0.5 * cfg.order_effect;

        const double u = rng.unit();
        if (u < cfg.target_excluded_fraction) {
            const double which = rng.unit();
            d.flavor = which < 0.5    ? Flavor::EarlyEvent
                       : which < 0.8 ? Flavor::NoPrescription
                                     : Flavor::BadDates;
        }
    });

    // Calibrate the risk-to-probability offset so labeled patients hit the
    // target TF fraction in expectation.
    double bias = 0.0;
    {
        std::vector<double> risks;
        risks.reserve(n);
        for (const Draft& d : drafts)
            if (d.flavor == Flavor::Labeled)
                risks.push_back(d.risk_raw);
        if (risks.empty())
            throw ConfigError("generator: exclusion rate leaves no labeled patients");
        auto mean_prob = [&](double b) {
            double s = 0.0;
            for (double r : risks)
                s += nn::sigmoid(r - b);
            return s / static_cast<double>(risks.size());
        };
        double lo = -40.0, hi = 40.0;
        for (int iter = 0; iter < 200; ++iter) {
            const double mid = 0.5 * (lo + hi);
            (mean_prob(mid) > cfg.target_tf_fraction ? lo : hi) = mid;
        }
        bias = 0.5 * (lo + hi);
    }

    const Code clopidogrel = *default_clopidogrel_codes().begin();
    const std::vector<Code> tf_codes(default_tf_codes().begin(), default_tf_codes().end());
    std::vector<PatientRecord> records(n);

    parallel_for(n, Exec::Parallel, [&](std::size_t i) {
        Draft& d = drafts[i];
        PatientRecord& r = records[i];
        r.patient_id = padded("P", static_cast<int>(i), 6);
        r.center_id = center_of[i];
        r.visits = std::move(d.pre);
        Rng rng(derive_seed({cfg.seed, seed_tag::kOutcome, static_cast<std::uint64_t>(i)}));
        const auto& cdf = cdfs[static_cast<std::size_t>(r.center_id - 1)];

        if (d.flavor != Flavor::NoPrescription)
            r.visits.push_back({d.index_day, false, {clopidogrel}});

        auto add_event = [&](int day) {
            Visit event{day, true, {tf_codes[rng.bounded(tf_codes.size())]}};
            r.visits.push_back(std::move(event));
        };

        switch (d.flavor) {
        case Flavor::EarlyEvent:
            add_event(d.index_day + rng.uniform_int(0, 7));
            break;
        case Flavor::BadDates:
            r.visits.front().day = -3;
            break;
        case Flavor::NoPrescription:
            break;
        case Flavor::Labeled: {
            if (rng.bernoulli(nn::sigmoid(d.risk_raw - bias)))
                add_event(d.index_day + rng.uniform_int(8, 365));
            else if (rng.bernoulli(kLateEventRate))
                add_event(d.index_day + rng.uniform_int(400, 520));
            const int npost = rng.uniform_int(0, kMaxPostVisits);
            for (int k = 0; k < npost; ++k) {
                Visit visit{d.index_day + rng.uniform_int(1, 365), rng.bernoulli(kErRate), {}};
                const int nc = rng.uniform_int(1, 3);
                for (int m = 0; m < nc; ++m)
                    visit.codes.push_back(pool.codes[sample_code(cdf, rng)]);
                r.visits.push_back(std::move(visit));
            }
            break;
        }
        }
        std::stable_sort(r.visits.begin(), r.visits.end(),
                         [](const Visit& a, const Visit& b) { return a.day < b.day; });
    });

    return records;
}

}  // namespace fedtrial
