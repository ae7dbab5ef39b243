#include "strusr/prior.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace strusr {

const char* to_string(PriorSource s) { return s == PriorSource::Pinn ? "pinn" : "analytic-oracle"; }

PriorSource prior_source_from_string(const std::string& s)
{
    if (s == "pinn") return PriorSource::Pinn;
    if (s == "analytic-oracle") return PriorSource::AnalyticOracle;
    throw std::invalid_argument("unknown prior source '" + s + "'");
}

TaylorPrior::TaylorPrior(PointSet anchors, int order, std::vector<double> coefficients, PriorSource source,
                         std::size_t dropped_anchors)
    : anchors_(std::move(anchors)),
      order_(order),
      coefficients_(std::move(coefficients)),
      source_(source),
      dropped_(dropped_anchors)
{
    if (order_ < 2 || order_ > kMaxJetOrder) throw std::invalid_argument("TaylorPrior: order must be in [2, 8]");
    if (anchors_.empty()) throw std::invalid_argument("TaylorPrior: at least one anchor is required");
    const std::size_t expected = anchors_.size() * anchors_.dimension() * static_cast<std::size_t>(order_ + 1);
    if (coefficients_.size() != expected) throw std::invalid_argument("TaylorPrior: coefficient array has wrong shape");
    for (const double c : coefficients_) {
        if (!std::isfinite(c)) throw std::invalid_argument("TaylorPrior: non-finite coefficient");
    }
}

std::span<const double> TaylorPrior::coefficients(std::size_t anchor, std::size_t axis) const
{
    const std::size_t width = static_cast<std::size_t>(order_ + 1);
    return {coefficients_.data() + (anchor * dimension() + axis) * width, width};
}

nlohmann::json TaylorPrior::to_json() const
{
    nlohmann::json j;
    j["source"] = to_string(source_);
    j["order"] = order_;
    j["dimension"] = dimension();
    j["dropped_anchors"] = dropped_;
    auto& anchors = j["anchors"] = nlohmann::json::array();
    auto& coeffs = j["coefficients"] = nlohmann::json::array();
    for (std::size_t i = 0; i < anchor_count(); ++i) {
        const auto p = anchors_.point(i);
        anchors.push_back(std::vector<double>(p.begin(), p.end()));
        nlohmann::json per_axis = nlohmann::json::array();
        for (std::size_t a = 0; a < dimension(); ++a) {
            const auto c = coefficients(i, a);
            per_axis.push_back(std::vector<double>(c.begin(), c.end()));
        }
        coeffs.push_back(std::move(per_axis));
    }
    return j;
}

TaylorPrior TaylorPrior::from_json(const nlohmann::json& j)
{
    const int order = j.at("order").get<int>();
    const auto dim = j.at("dimension").get<std::size_t>();
    const auto anchors = j.at("anchors").get<std::vector<std::vector<double>>>();
    const auto& coeffs = j.at("coefficients");
    if (coeffs.size() != anchors.size()) throw std::invalid_argument("prior JSON: anchors/coefficients mismatch");
    std::vector<double> flat;
    for (const auto& per_anchor : coeffs) {
        if (per_anchor.size() != dim) throw std::invalid_argument("prior JSON: wrong axis count");
        for (const auto& per_axis : per_anchor) {
            const auto v = per_axis.get<std::vector<double>>();
            if (v.size() != static_cast<std::size_t>(order + 1)) throw std::invalid_argument("prior JSON: wrong order");
            flat.insert(flat.end(), v.begin(), v.end());
        }
    }
    return TaylorPrior(PointSet::from_points(dim, anchors), order, std::move(flat),
                       prior_source_from_string(j.at("source").get<std::string>()),
                       j.value("dropped_anchors", std::size_t{0}));
}

void TaylorPrior::save(const std::filesystem::path& path) const
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_json().dump(2) << '\n';
}

TaylorPrior TaylorPrior::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return from_json(nlohmann::json::parse(in));
}

PointSet select_anchors(const PdeProblem& problem, std::size_t n, Rng& rng)
{
    if (n == 0) throw std::invalid_argument("select_anchors: n must be positive");
    return sample_interior(problem, n, 0.05, rng);
}

TaylorPrior extract_prior(const JetSource& source, const PointSet& anchors, int order, PriorSource tag)
{
    if (order < 2 || order > kMaxJetOrder) throw std::invalid_argument("extract_prior: order must be in [2, 8]");
    const std::size_t d = anchors.dimension();
    // same batch path as taylor_loss, so a source scores exactly zero against its own prior
    std::vector<JetRequest> requests;
    for (std::size_t a = 0; a < d; ++a) requests.push_back({a, order});
    BatchJets jets;
    source.eval_batch(anchors, requests, jets);

    std::vector<double> kept_points;
    std::vector<double> coeffs;
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        std::vector<double> row;
        bool ok = true;
        for (std::size_t a = 0; a < d; ++a) {
            for (int k = 0; k <= order; ++k) {
                const double c = jets.coefficient(a, k, i);
                ok = ok && std::isfinite(c);
                row.push_back(c);
            }
        }
        if (!ok) {
            ++dropped;
            continue;
        }
        const auto p = anchors.point(i);
        kept_points.insert(kept_points.end(), p.begin(), p.end());
        coeffs.insert(coeffs.end(), row.begin(), row.end());
    }
    if (kept_points.empty()) throw std::runtime_error("extract_prior: every anchor produced an invalid jet");
    return TaylorPrior(PointSet(d, std::move(kept_points)), order, std::move(coeffs), tag, dropped);
}

double taylor_loss(const JetSource& f, const TaylorPrior& prior)
{
    const std::size_t d = prior.dimension();
    const std::size_t n = prior.anchor_count();
    const int order = prior.order();
    thread_local std::vector<JetRequest> requests;
    requests.clear();
    for (std::size_t a = 0; a < d; ++a) requests.push_back({a, order});
    thread_local BatchJets jets;
    f.eval_batch(prior.anchors(), requests, jets);

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < d; ++a) {
            const auto ref = prior.coefficients(i, a);
            double acc = 0.0;
            for (int k = 0; k <= order; ++k) {
                const double c = jets.coefficient(a, k, i);
                if (!std::isfinite(c)) return kPenalty;
                const double diff = c - ref[static_cast<std::size_t>(k)];
                acc += diff * diff;
            }
            total += acc;
        }
    }
    const double loss = total / static_cast<double>(n * d);
    return std::isfinite(loss) ? std::min(loss, kPenalty) : kPenalty;
}

double taylor_loss(const Expr& f, const TaylorPrior& prior) { return taylor_loss(ExprSource(f), prior); }

}  // namespace strusr
