// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#include "celltrack/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "celltrack/error.hpp"
#include "celltrack/text.hpp"

namespace celltrack::analysis {

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

bool passes_length(const Track& t, const AnalysisFilter& f) { return !t.empty() && t.span() >= f.min_track_frames; }

std::optional<double> size_summary(const Track& t, const AnalysisFilter& f) {
    std::vector<double> sizes;
    for (const auto& [frame, s] : cell_size_series(t)) sizes.push_back(s);
    if (sizes.empty()) return std::nullopt;
    return f.median_size ? median_of(std::move(sizes)) : mean_of(sizes);
}

std::string fmt(double v) { return text::format(v); }
std::string fmt(const std::optional<double>& v) { return v ? text::format(*v) : std::string("nan"); }

}  // namespace

void AnalysisFilter::validate() const {
    if (min_track_frames <= 0 || max_generation <= 0 || max_interdivision_frames <= 0 || bin_size <= 0 ||
        sample_size <= 0) {
        fail(ErrorKind::Validation, "analysis filter: all thresholds must be positive");
    }
}

std::string group_of(const LineageForest& forest) { return forest.meta.tag("dosage", "all"); }

GenerationIndex generation_index(const LineageForest& forest) {
    GenerationIndex gen;
    for (const auto& [id, t] : forest.tracks) {
        if (t.parent) continue;
        // Breadth-first from every root.
        std::vector<std::pair<TrackId, int>> queue{{id, 0}};
        for (std::size_t k = 0; k < queue.size(); ++k) {
            const auto [cur, g] = queue[k];
            gen[cur] = g;
            for (TrackId c : forest.at(cur).children) queue.emplace_back(c, g + 1);
        }
    }
    return gen;
}

EventRates event_rates(const LineageForest& forest, int bin_size) {
    if (bin_size <= 0) fail(ErrorKind::InvalidArgument, "bin_size must be positive");
    EventRates r;
    if (forest.tracks.empty() || forest.meta.frame_count <= 0) return r;
    const int frames = forest.meta.frame_count;
    r.population.assign(static_cast<std::size_t>(frames), 0);
    r.alive.assign(static_cast<std::size_t>(frames), 0);
    std::vector<long long> divisions(static_cast<std::size_t>(frames), 0), deaths(static_cast<std::size_t>(frames), 0);
    for (const auto& [id, t] : forest.tracks) {
        if (t.empty()) continue;
        for (int f = std::max(0, t.start_frame()); f <= std::min(frames - 1, t.last_frame()); ++f) {
            ++r.population[static_cast<std::size_t>(f)];
            auto it = t.entries.upper_bound(f);
            --it;  // entry at or before f decides the class inside gaps
            if (it->second.cls == CellClass::Alive) ++r.alive[static_cast<std::size_t>(f)];
        }
        if (t.end_reason == EndReason::Division && t.last_frame() < frames) {
            ++divisions[static_cast<std::size_t>(t.last_frame())];
        }
        if (auto d = t.death_frame(); d && *d < frames) ++deaths[static_cast<std::size_t>(*d)];
    }
    for (int s = 0; s < frames; s += bin_size) {
        EventRateBin b;
        b.start = s;
        b.end = std::min(frames, s + bin_size);
        double alive = 0.0, pop = 0.0;
        for (int f = b.start; f < b.end; ++f) {
            b.divisions += divisions[static_cast<std::size_t>(f)];
            b.deaths += deaths[static_cast<std::size_t>(f)];
            alive += static_cast<double>(r.alive[static_cast<std::size_t>(f)]);
            pop += static_cast<double>(r.population[static_cast<std::size_t>(f)]);
        }
        const double n = static_cast<double>(b.end - b.start);
        b.mean_alive = alive / n;
        b.mean_population = pop / n;
        if (b.mean_alive > 0.0) {
            b.division_rate = static_cast<double>(b.divisions) / b.mean_alive;
            b.death_rate = static_cast<double>(b.deaths) / b.mean_alive;
        }
        r.bins.push_back(b);
    }
    return r;
}

std::map<std::string, EventRates> grouped_event_rates(std::span<const LineageForest> forests, int bin_size) {
    std::map<std::string, std::vector<EventRates>> parts;
    for (const auto& f : forests) {
        auto r = event_rates(f, bin_size);
        if (!r.bins.empty()) parts[group_of(f)].push_back(std::move(r));
    }
    std::map<std::string, EventRates> out;
    for (auto& [group, list] : parts) {
        EventRates sum;
        std::size_t frames = 0;
        for (const auto& r : list) frames = std::max(frames, r.population.size());
        sum.population.assign(frames, 0);
        sum.alive.assign(frames, 0);
        std::size_t bins = 0;
        for (const auto& r : list) bins = std::max(bins, r.bins.size());
        sum.bins.resize(bins);
        std::vector<double> alive_total(bins, 0.0), pop_total(bins, 0.0);
        for (const auto& r : list) {
            for (std::size_t f = 0; f < r.population.size(); ++f) {
                sum.population[f] += r.population[f];
                sum.alive[f] += r.alive[f];
            }
            for (std::size_t b = 0; b < r.bins.size(); ++b) {
                auto& dst = sum.bins[b];
                dst.start = r.bins[b].start;
                dst.end = std::max(dst.end, r.bins[b].end);
                dst.divisions += r.bins[b].divisions;
                dst.deaths += r.bins[b].deaths;
            }
        }
        for (std::size_t b = 0; b < bins; ++b) {
            auto& dst = sum.bins[b];
            double alive = 0.0, pop = 0.0;
            for (int f = dst.start; f < dst.end; ++f) {
                alive += static_cast<double>(sum.alive[static_cast<std::size_t>(f)]);
                pop += static_cast<double>(sum.population[static_cast<std::size_t>(f)]);
            }
            const double n = static_cast<double>(dst.end - dst.start);
            dst.mean_alive = alive / n;
            dst.mean_population = pop / n;
            if (dst.mean_alive > 0.0) {
                dst.division_rate = static_cast<double>(dst.divisions) / dst.mean_alive;
                dst.death_rate = static_cast<double>(dst.deaths) / dst.mean_alive;
            }
        }
        out.emplace(group, std::move(sum));
    }
    return out;
}

std::vector<std::pair<int, double>> cell_size_series(const Track& track) {
    std::vector<std::pair<int, double>> out;
    for (const auto& [frame, e] : track.entries) {
        if (e.observed()) out.emplace_back(frame, e.box.area());
    }
    return out;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) fail(ErrorKind::InvalidArgument, "pearson: series lengths differ");
    if (x.size() < 2) return std::nullopt;
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<AncestorPair> ancestor_descendant_pairs(const LineageForest& forest, const AnalysisFilter& filter) {
    filter.validate();
    const auto gen = generation_index(forest);
    const std::string group = group_of(forest);
    std::map<TrackId, double> size;
    for (const auto& [id, t] : forest.tracks) {
        if (!passes_length(t, filter) || gen.at(id) > filter.max_generation) continue;
        if (auto s = size_summary(t, filter)) size[id] = *s;
    }
    std::vector<AncestorPair> out;
    for (const auto& [id, s] : size) {
        const int g = gen.at(id);
        if (g < 2) continue;
        for (auto a = forest.at(id).parent; a; a = forest.at(*a).parent) {
            const int ga = gen.at(*a);
            if (ga < 1) break;
            auto it = size.find(*a);
            if (it == size.end()) continue;
            out.push_back({group, *a, id, ga, g, it->second, s});
        }
    }
    return out;
}

AncestorDescendantResult ancestor_descendant_correlation(std::span<const AncestorPair> pairs) {
    using Key = std::pair<std::string, std::pair<int, int>>;
    std::map<Key, std::pair<std::vector<double>, std::vector<double>>> cells;
    std::map<std::pair<std::string, int>, std::pair<std::vector<double>, std::vector<double>>> gaps;
    for (const auto& p : pairs) {
        auto& c = cells[{p.group, {p.ancestor_generation, p.descendant_generation}}];
        c.first.push_back(p.ancestor_size);
        c.second.push_back(p.descendant_size);
        auto& g = gaps[{p.group, p.descendant_generation - p.ancestor_generation}];
        g.first.push_back(p.ancestor_size);
        g.second.push_back(p.descendant_size);
    }
    AncestorDescendantResult out;
    std::map<std::pair<std::string, int>, std::vector<double>> per_gap_r;
    for (const auto& [key, xy] : cells) {
        auto r = pearson(xy.first, xy.second);
        if (!r) continue;
        const auto& [ag, dg] = key.second;
        out.by_generation.push_back({key.first, ag, dg, xy.first.size(), *r});
        per_gap_r[{key.first, dg - ag}].push_back(*r);
    }
    for (const auto& [key, xy] : gaps) {
        GapCorrelation g;
        g.group = key.first;
        g.gap = key.second;
        g.pairs = xy.first.size();
        g.r = pearson(xy.first, xy.second);
        auto it = per_gap_r.find(key);
        if (it != per_gap_r.end()) {
            g.cells = it->second.size();
            g.median_r = median_of(it->second);
            g.min_r = *std::min_element(it->second.begin(), it->second.end());
            g.max_r = *std::max_element(it->second.begin(), it->second.end());
        }
        if (g.r || g.cells > 0) out.by_gap.push_back(g);
    }
    return out;
}

AncestorDescendantResult ancestor_descendant_correlation(std::span<const LineageForest> forests,
                                                         const AnalysisFilter& filter) {
    std::vector<AncestorPair> all;
    for (const auto& f : forests) {
        auto p = ancestor_descendant_pairs(f, filter);
        all.insert(all.end(), p.begin(), p.end());
    }
    return ancestor_descendant_correlation(all);
}

std::vector<SisterPair> sister_correlation(const LineageForest& forest, const AnalysisFilter& filter) {
    filter.validate();
    const auto gen = generation_index(forest);
    const std::string group = group_of(forest);
    std::vector<SisterPair> out;
    for (const auto& [id, mother] : forest.tracks) {
        const auto& kids = mother.children;
        for (std::size_t i = 0; i < kids.size(); ++i) {
            for (std::size_t j = i + 1; j < kids.size(); ++j) {
                const Track& a = forest.at(std::min(kids[i], kids[j]));
                const Track& b = forest.at(std::max(kids[i], kids[j]));
                if (!passes_length(a, filter) || !passes_length(b, filter)) continue;
                if (gen.at(a.id) > filter.max_generation) continue;
                const auto sa = cell_size_series(a);
                const auto sb = cell_size_series(b);
                std::vector<double> x, y;
                std::size_t p = 0, q = 0;
                while (p < sa.size() && q < sb.size()) {
                    if (sa[p].first < sb[q].first) ++p;
                    else if (sb[q].first < sa[p].first) ++q;
                    else {
                        x.push_back(sa[p++].second);
                        y.push_back(sb[q++].second);
                    }
                }
                if (x.size() < 2) continue;
                out.push_back({group, id, a.id, b.id, gen.at(a.id), x.size(), pearson(x, y)});
            }
        }
    }
    return out;
}

std::vector<SisterPair> sister_correlation(std::span<const LineageForest> forests, const AnalysisFilter& filter) {
    std::vector<SisterPair> out;
    for (const auto& f : forests) {
        auto p = sister_correlation(f, filter);
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

InterdivisionResult interdivision_times(std::span<const LineageForest> forests, const AnalysisFilter& filter) {
    filter.validate();
    InterdivisionResult out;
    std::map<std::pair<std::string, int>, std::pair<std::vector<double>, std::size_t>> groups;
    for (const auto& forest : forests) {
        const auto gen = generation_index(forest);
        const std::string group = group_of(forest);
        for (const auto& [id, t] : forest.tracks) {
            if (t.empty() || !t.parent || t.end_reason != EndReason::Division) continue;
            InterdivisionRecord r{group, id, gen.at(id), t.span(), false};
            r.excluded = r.duration > filter.max_interdivision_frames;
            auto& g = groups[{group, r.generation}];
            if (r.excluded) ++g.second;
            else g.first.push_back(static_cast<double>(r.duration));
            out.records.push_back(r);
        }
    }
    for (const auto& [key, g] : groups) {
        InterdivisionStats s;
        s.group = key.first;
        s.generation = key.second;
        s.count = g.first.size();
        s.excluded = g.second;
        s.mean = mean_of(g.first);
        s.median = median_of(g.first);
        out.stats.push_back(s);
    }
    return out;
}

std::string_view to_string(ProfileEventKind k) {
    switch (k) {
        case ProfileEventKind::Division: return "division";
        case ProfileEventKind::Death: return "death";
        case ProfileEventKind::Censored: return "censored";
    }
    return "censored";
}

std::vector<DivisionProfile> eligible_profiles(const LineageForest& forest) {
    std::vector<DivisionProfile> out;
    const std::string group = group_of(forest);
    for (const auto& [id, leaf] : forest.tracks) {
        if (leaf.empty() || !leaf.children.empty()) continue;
        const bool death = leaf.end_reason == EndReason::Death;
        if (!death && leaf.end_reason != EndReason::EndOfVideo) continue;
        std::vector<const Track*> path{&leaf};
        while (path.back()->parent) path.push_back(&forest.at(*path.back()->parent));
        std::reverse(path.begin(), path.end());
        DivisionProfile p;
        p.group = group;
        p.leaf = id;
        p.root = path.front()->id;
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
            p.events.push_back({path[k]->last_frame(), ProfileEventKind::Division});
        }
        p.divisions = static_cast<int>(p.events.size());
        if (death) p.events.push_back({leaf.death_frame().value_or(leaf.last_frame()), ProfileEventKind::Death});
        else p.events.push_back({leaf.last_frame(), ProfileEventKind::Censored});
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<std::size_t> largest_remainder_allocation(std::span<const std::size_t> counts, std::size_t sample) {
    const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    std::vector<std::size_t> quota(counts.size(), 0);
    if (total == 0) return quota;
    if (sample >= total) return {counts.begin(), counts.end()};
    std::vector<std::pair<std::size_t, std::size_t>> remainder;  // (remainder numerator, bucket)
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const std::size_t num = counts[k] * sample;  // exact share = num / total
        quota[k] = num / total;
        assigned += quota[k];
        remainder.emplace_back(num % total, k);
    }
    std::sort(remainder.begin(), remainder.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t k = 0; assigned < sample; ++k, ++assigned) ++quota[remainder[k].second];
    return quota;
}

std::vector<DivisionProfile> division_profiles(std::span<const LineageForest> forests, int sample_size,
                                               std::uint64_t seed) {
    if (sample_size <= 0) fail(ErrorKind::InvalidArgument, "sample_size must be positive");
    std::map<std::string, std::vector<DivisionProfile>> groups;
    for (const auto& f : forests) {
        for (auto& p : eligible_profiles(f)) groups[p.group].push_back(std::move(p));
    }
    std::vector<DivisionProfile> out;
    std::uint64_t group_salt = 0;
    for (auto& [group, all] : groups) {
        ++group_salt;
        if (all.size() <= static_cast<std::size_t>(sample_size)) {
            for (auto& p : all) out.push_back(std::move(p));
            continue;
        }
        int max_div = 0;
        for (const auto& p : all) max_div = std::max(max_div, p.divisions);
        std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(max_div) + 1);
        for (std::size_t i = 0; i < all.size(); ++i) buckets[static_cast<std::size_t>(all[i].divisions)].push_back(i);
        std::vector<std::size_t> counts;
        for (const auto& b : buckets) counts.push_back(b.size());
        const auto quota = largest_remainder_allocation(counts, static_cast<std::size_t>(sample_size));
        std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + group_salt);
        std::vector<std::size_t> chosen;
        for (std::size_t k = 0; k < buckets.size(); ++k) {
            auto b = buckets[k];
            std::shuffle(b.begin(), b.end(), rng);
            chosen.insert(chosen.end(), b.begin(), b.begin() + static_cast<std::ptrdiff_t>(quota[k]));
        }
        std::sort(chosen.begin(), chosen.end());
        for (std::size_t i : chosen) out.push_back(std::move(all[i]));
    }
    return out;
}

void write_event_rates_csv(std::ostream& out, const std::map<std::string, EventRates>& rates) {
    out << "group,bin_start,bin_end,divisions,deaths,mean_alive,mean_population,division_rate,death_rate\n";
    for (const auto& [group, r] : rates) {
        for (const auto& b : r.bins) {
            out << group << ',' << b.start << ',' << b.end << ',' << b.divisions << ',' << b.deaths << ','
                << fmt(b.mean_alive) << ',' << fmt(b.mean_population) << ',' << fmt(b.division_rate) << ','
                << fmt(b.death_rate) << '\n';
        }
    }
}

void write_ancestor_descendant_csv(std::ostream& out, const AncestorDescendantResult& result) {
    out << "group,scope,ancestor_generation,descendant_generation,gap,pairs,pearson,cells,median_r,min_r,max_r\n";
    for (const auto& c : result.by_generation) {
        out << c.group << ",generation," << c.ancestor_generation << ',' << c.descendant_generation << ','
            << c.descendant_generation - c.ancestor_generation << ',' << c.pairs << ',' << fmt(c.r) << ",1,"
            << fmt(c.r) << ',' << fmt(c.r) << ',' << fmt(c.r) << '\n';
    }
    for (const auto& g : result.by_gap) {
        out << g.group << ",gap,,," << g.gap << ',' << g.pairs << ',' << fmt(g.r) << ',' << g.cells << ',';
        if (g.cells > 0) out << fmt(g.median_r) << ',' << fmt(g.min_r) << ',' << fmt(g.max_r) << '\n';
        else out << "nan,nan,nan\n";
    }
}

void write_sister_csv(std::ostream& out, std::span<const SisterPair> pairs) {
    out << "group,mother,sister_a,sister_b,generation,common_frames,pearson\n";
    for (const auto& p : pairs) {
        out << p.group << ',' << p.mother << ',' << p.first << ',' << p.second << ',' << p.generation << ','
            << p.common_frames << ',' << fmt(p.r) << '\n';
    }
}

void write_interdivision_csv(std::ostream& out, const InterdivisionResult& result) {
    out << "group,generation,count,excluded,mean,median\n";
    for (const auto& s : result.stats) {
        out << s.group << ',' << s.generation << ',' << s.count << ',' << s.excluded << ',';
        if (s.count > 0) out << fmt(s.mean) << ',' << fmt(s.median) << '\n';
        else out << "nan,nan\n";
    }
}

void write_profiles_csv(std::ostream& out, std::span<const DivisionProfile> profiles) {
    out << "group,cell,root,divisions,event_index,frame,event\n";
    for (const auto& p : profiles) {
        for (std::size_t k = 0; k < p.events.size(); ++k) {
            out << p.group << ',' << p.leaf << ',' << p.root << ',' << p.divisions << ',' << k << ','
                << p.events[k].frame << ',' << to_string(p.events[k].kind) << '\n';
        }
    }
}

}  // namespace celltrack::analysis
