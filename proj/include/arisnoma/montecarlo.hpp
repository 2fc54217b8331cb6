#pragma once

// First-principles Monte Carlo engine. Each trial draws every channel
// coefficient from its own counter-based stream keyed on (seed, trial), so a
// trial's draw is reproducible in isolation and results do not depend on how
// trials are scheduled across workers.

#include "arisnoma/analytic.hpp"
#include "arisnoma/model.hpp"

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace arisnoma::mc {

/// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Uniform 64-bit generator whose i-th output is a pure function of
/// (seed, trial, i).
class TrialStream
{
public:
    using result_type = std::uint64_t;

    TrialStream(std::uint64_t seed, std::uint64_t trial) : key_(mix64(mix64(seed) + trial)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        counter_ += kGolden;
        return mix64(key_ + counter_);
    }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// A draw with unit-variance channels and unit-mean residual terms. Scaling
/// by the mean gains turns it into a ChannelDraw for any geometry.
struct UnitDraw
{
    double gain_n, gain_f, gain_e;
    double norm_n, norm_f, norm_e;
    double ip_user, ip_eve;
};

struct DrawOptions
{
    /// One BS->RIS vector shared by all three cascades instead of one per receiver.
    bool shared_hbr = false;
};

namespace detail {

struct Cascade
{
    double gain;
    double norm;
};

// Unnormalized normals: each CN(0,1) coefficient is (a + ib)/sqrt(2).
template <class Normal>
inline Cascade draw_cascade(TrialStream& rng, Normal& normal, int q, const double* hbr_re,
                            const double* hbr_im)
{
    double sum_re = 0.0;
    double sum_im = 0.0;
    double norm = 0.0;
    for (int i = 0; i < q; ++i)
    {
        const double hr_re = normal(rng);
        const double hr_im = normal(rng);
        // conj(h_r) * h_br
        sum_re += hr_re * hbr_re[i] + hr_im * hbr_im[i];
        sum_im += hr_re * hbr_im[i] - hr_im * hbr_re[i];
        norm += hr_re * hr_re + hr_im * hr_im;
    }
    return {0.25 * (sum_re * sum_re + sum_im * sum_im), 0.5 * norm};
}

}  // namespace detail

inline constexpr int kMaxOnElements = 4096;

/// Draw order: h_br(n), h_rn, h_br(f), h_rf, h_br(e), h_re, |h_ipu|^2, |h_ipe|^2,
/// with the h_br draws after the first skipped when shared.
inline UnitDraw sample_unit_draw(TrialStream& rng, int q, const DrawOptions& options = {})
{
    if (q < 1 || q > kMaxOnElements)
        throw std::invalid_argument("sample_unit_draw: Q out of range");
    boost::random::normal_distribution<double> normal;
    boost::random::exponential_distribution<double> exponential;
    double hbr_re[kMaxOnElements];
    double hbr_im[kMaxOnElements];
    auto fill_hbr = [&] {
        for (int i = 0; i < q; ++i)
        {
            hbr_re[i] = normal(rng);
            hbr_im[i] = normal(rng);
        }
    };
    UnitDraw u{};
    fill_hbr();
    auto n = detail::draw_cascade(rng, normal, q, hbr_re, hbr_im);
    if (!options.shared_hbr)
        fill_hbr();
    auto f = detail::draw_cascade(rng, normal, q, hbr_re, hbr_im);
    if (!options.shared_hbr)
        fill_hbr();
    auto e = detail::draw_cascade(rng, normal, q, hbr_re, hbr_im);
    u.gain_n = n.gain;
    u.gain_f = f.gain;
    u.gain_e = e.gain;
    u.norm_n = n.norm;
    u.norm_f = f.norm;
    u.norm_e = e.norm;
    u.ip_user = exponential(rng);
    u.ip_eve = exponential(rng);
    return u;
}

inline ChannelDraw scale(const UnitDraw& u, const SystemParams& p, const DerivedConstants& k)
{
    ChannelDraw d;
    d.cascaded_gain_n = k.omega_br * k.omega_rn * u.gain_n;
    d.cascaded_gain_f = k.omega_br * k.omega_rf * u.gain_f;
    d.cascaded_gain_e = k.omega_br * k.omega_re * u.gain_e;
    d.norm_n = k.omega_rn * u.norm_n;
    d.norm_f = k.omega_rf * u.norm_f;
    d.norm_e = k.omega_re * u.norm_e;
    d.ip_user = p.omega_ipu * u.ip_user;
    d.ip_eve = p.omega_ipe * u.ip_eve;
    return d;
}

/// One realization of every fading and residual variable for params.
inline ChannelDraw sample_draw(TrialStream& rng, const SystemParams& p, const DrawOptions& options = {})
{
    return scale(sample_unit_draw(rng, p.Q, options), p, derive(p));
}

/// The draw of trial `trial` under `seed`, as every estimator sees it.
inline ChannelDraw draw_for_trial(std::uint64_t seed, std::uint64_t trial, const SystemParams& p,
                                  const DrawOptions& options = {})
{
    TrialStream rng(seed, trial);
    return sample_draw(rng, p, options);
}

// ---------------------------------------------------------------------------
// Outage events and empirical CDFs
// ---------------------------------------------------------------------------

/// Evaluates one secrecy-outage event on scaled draws.
class OutageEvent
{
public:
    OutageEvent(const SystemParams& params, Scenario scenario, Sic sic)
        : params_(with_sic(params, sic)), k_(derive(params_)), scenario_(scenario),
          rate_factor_(std::exp2(target_rate(params_, scenario))),
          zero_rate_(target_rate(params_, scenario) == 0.0)
    {
    }

    bool operator()(const UnitDraw& u) const { return occurs(scale(u, params_, k_)); }

    /// [C_s]^+ < R. Equivalent to the SINR threshold test for R > 0; never true at R = 0.
    bool occurs(const ChannelDraw& d) const
    {
        if (zero_rate_)
            return false;
        switch (scenario_)
        {
        case Scenario::external_n:
            return sinr_user_n(d, k_) < rate_factor_ * (1.0 + sinr_eve_n(d, k_)) - 1.0;
        case Scenario::external_f:
            return sinr_user_f(d, k_) < rate_factor_ * (1.0 + sinr_eve_f(d, k_)) - 1.0;
        case Scenario::internal:
            return sinr_user_n(d, k_) < rate_factor_ * (1.0 + sinr_internal_f_to_n(d, k_)) - 1.0;
        }
        return false;
    }

    const SystemParams& params() const { return params_; }

private:
    SystemParams params_;
    DerivedConstants k_;
    Scenario scenario_;
    double rate_factor_;
    bool zero_rate_;
};

enum class Variable {
    sinr_user_n,
    sinr_user_f,
    sinr_eve_n,
    sinr_eve_f,
    sinr_internal_f_to_n,
    cascaded_gain_n,
};

inline double evaluate(Variable v, const ChannelDraw& d, const DerivedConstants& k)
{
    switch (v)
    {
    case Variable::sinr_user_n: return sinr_user_n(d, k);
    case Variable::sinr_user_f: return sinr_user_f(d, k);
    case Variable::sinr_eve_n: return sinr_eve_n(d, k);
    case Variable::sinr_eve_f: return sinr_eve_f(d, k);
    case Variable::sinr_internal_f_to_n: return sinr_internal_f_to_n(d, k);
    case Variable::cascaded_gain_n: return d.cascaded_gain_n;
    }
    return 0.0;
}

struct SopQuery
{
    SystemParams params;
    Scenario scenario = Scenario::external_n;
    Sic sic = Sic::psic;
};

/// Counts of draws with variable <= threshold, per threshold.
struct CdfQuery
{
    SystemParams params;
    Variable variable = Variable::sinr_user_n;
    std::vector<double> thresholds;
};

struct BatchOptions
{
    DrawOptions draw;
    unsigned workers = 1;  // 0: one per hardware thread
    std::uint64_t chunk = 1u << 15;
};

struct BatchCounts
{
    std::uint64_t trials = 0;
    std::vector<std::uint64_t> outages;              // per SopQuery
    std::vector<std::vector<std::uint64_t>> below;  // per CdfQuery, per threshold
};

/// Runs fn(chunk_index) for every chunk on `workers` threads. The first
/// exception thrown is rethrown after all threads stop.
template <class Fn>
void parallel_chunks(std::uint64_t chunks, unsigned workers, Fn fn)
{
    if (workers == 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(chunks, 1)));
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::uint64_t c; (c = next.fetch_add(1)) < chunks;)
        {
            try
            {
                fn(c);
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next.store(chunks);
            }
        }
    };
    if (workers == 1)
        work();
    else
    {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < workers; ++i)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);
}

/// Evaluates every query on the same `trials` draws. All queries must share Q.
inline BatchCounts run_batch(const std::vector<SopQuery>& sop_queries,
                             const std::vector<CdfQuery>& cdf_queries, std::uint64_t trials,
                             std::uint64_t seed, const BatchOptions& options = {})
{
    int q = 0;
    auto check_q = [&q](int query_q) {
        if (q == 0)
            q = query_q;
        else if (q != query_q)
            throw std::invalid_argument("run_batch: all queries must share the same Q");
    };
    for (const auto& s : sop_queries)
        check_q(s.params.Q);
    for (const auto& c : cdf_queries)
        check_q(c.params.Q);
    if (q == 0)
        throw std::invalid_argument("run_batch: no queries");
    if (trials == 0)
        throw std::invalid_argument("run_batch: trials must be > 0");

    std::vector<OutageEvent> events;
    events.reserve(sop_queries.size());
    for (const auto& s : sop_queries)
        events.emplace_back(s.params, s.scenario, s.sic);
    std::vector<DerivedConstants> cdf_consts;
    for (const auto& c : cdf_queries)
    {
        cdf_consts.push_back(derive(c.params));
        if (!std::is_sorted(c.thresholds.begin(), c.thresholds.end()))
            throw std::invalid_argument("run_batch: CDF thresholds must be ascending");
    }

    const std::uint64_t chunk = std::max<std::uint64_t>(options.chunk, 1);
    const std::uint64_t chunks = (trials + chunk - 1) / chunk;
    // Per chunk: outages, then the CDF counts of every query back to back.
    std::size_t cdf_slots = 0;
    for (const auto& c : cdf_queries)
        cdf_slots += c.thresholds.size();
    const std::size_t width = events.size() + cdf_slots;
    std::vector<std::uint64_t> per_chunk(chunks * width, 0);

    parallel_chunks(chunks, options.workers, [&](std::uint64_t c) {
        std::uint64_t* counts = per_chunk.data() + c * width;
        const std::uint64_t begin = c * chunk;
        const std::uint64_t end = std::min(trials, begin + chunk);
        for (std::uint64_t t = begin; t < end; ++t)
        {
            TrialStream rng(seed, t);
            const UnitDraw u = sample_unit_draw(rng, q, options.draw);
            for (std::size_t i = 0; i < events.size(); ++i)
                counts[i] += events[i](u) ? 1 : 0;
            std::size_t slot = events.size();
            for (std::size_t i = 0; i < cdf_queries.size(); ++i)
            {
                const auto& thresholds = cdf_queries[i].thresholds;
                const double value =
                    evaluate(cdf_queries[i].variable, scale(u, cdf_queries[i].params, cdf_consts[i]),
                             cdf_consts[i]);
                // thresholds ascending: value <= x_j for every j from the first hit on
                const auto first = std::lower_bound(thresholds.begin(), thresholds.end(), value);
                for (auto it = first; it != thresholds.end(); ++it)
                    ++counts[slot + static_cast<std::size_t>(it - thresholds.begin())];
                slot += thresholds.size();
            }
        }
    });

    BatchCounts out;
    out.trials = trials;
    out.outages.assign(events.size(), 0);
    for (const auto& c : cdf_queries)
        out.below.emplace_back(c.thresholds.size(), 0);
    for (std::uint64_t c = 0; c < chunks; ++c)
    {
        const std::uint64_t* counts = per_chunk.data() + c * width;
        for (std::size_t i = 0; i < events.size(); ++i)
            out.outages[i] += counts[i];
        std::size_t slot = events.size();
        for (std::size_t i = 0; i < cdf_queries.size(); ++i)
            for (std::size_t j = 0; j < cdf_queries[i].thresholds.size(); ++j)
                out.below[i][j] += counts[slot++];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

struct McResult
{
    SopEstimate sop;
    double throughput = 0;
    double throughput_std_error = 0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    double wall_time = 0;  // seconds; not part of any reproducible output
};

inline SopEstimate proportion(std::uint64_t hits, std::uint64_t trials)
{
    SopEstimate e;
    e.provenance = Provenance::monte_carlo;
    e.value = static_cast<double>(hits) / static_cast<double>(trials);
    e.trials = trials;
    e.std_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(trials));
    return e;
}

inline McResult make_result(const SystemParams& p, Scenario scenario, std::uint64_t hits,
                            std::uint64_t trials, std::uint64_t seed)
{
    McResult r;
    r.sop = proportion(hits, trials);
    const double rate = target_rate(p, scenario);
    r.throughput = secrecy_throughput(r.sop.value, rate);
    r.throughput_std_error = *r.sop.std_error * rate;
    r.trials = trials;
    r.seed = seed;
    return r;
}

inline constexpr std::uint64_t kMinTrials = 10'000;

inline McResult estimate_sop(const SystemParams& p, Scenario scenario, Sic sic, std::uint64_t trials,
                             std::uint64_t seed, const BatchOptions& options = {})
{
    if (trials < kMinTrials)
        throw std::invalid_argument("estimate_sop: trials must be >= 10000");
    const auto start = std::chrono::steady_clock::now();
    const auto counts = run_batch({SopQuery{p, scenario, sic}}, {}, trials, seed, options);
    auto r = make_result(p, scenario, counts.outages[0], trials, seed);
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

/// Same draws as estimate_sop; throughput fields carry (1 - SOP) R and stderr R.
inline McResult estimate_throughput(const SystemParams& p, Scenario scenario, Sic sic,
                                    std::uint64_t trials, std::uint64_t seed,
                                    const BatchOptions& options = {})
{
    return estimate_sop(p, scenario, sic, trials, seed, options);
}

/// SOP estimates for many queries from one stream of draws, grouped by Q.
inline std::vector<McResult> estimate_sop_batch(const std::vector<SopQuery>& queries,
                                                std::uint64_t trials, std::uint64_t seed,
                                                const BatchOptions& options = {})
{
    std::vector<McResult> results(queries.size());
    std::vector<int> qs;
    for (const auto& query : queries)
        if (std::find(qs.begin(), qs.end(), query.params.Q) == qs.end())
            qs.push_back(query.params.Q);
    for (int q : qs)
    {
        std::vector<SopQuery> group;
        std::vector<std::size_t> index;
        for (std::size_t i = 0; i < queries.size(); ++i)
            if (queries[i].params.Q == q)
            {
                group.push_back(queries[i]);
                index.push_back(i);
            }
        const auto counts = run_batch(group, {}, trials, seed, options);
        for (std::size_t j = 0; j < group.size(); ++j)
            results[index[j]] =
                make_result(group[j].params, group[j].scenario, counts.outages[j], trials, seed);
    }
    return results;
}

}  // namespace arisnoma::mc
