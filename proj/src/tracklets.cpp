#include <boltrack/tracklets.hpp>

#include <boltrack/errors.hpp>

#include <algorithm>
#include <cassert>
#include <string>

namespace boltrack {

std::vector<MatchPair> greedy_match(std::span<const BoundingBox> live_tails, std::span<const Detection> detections,
                                    double threshold) {
    std::vector<MatchPair> candidates;
    for (std::size_t l = 0; l < live_tails.size(); ++l) {
        for (std::size_t d = 0; d < detections.size(); ++d) {
            const double v = iou(live_tails[l], detections[d].box);
            if (v >= threshold && v > 0.0) {
                candidates.push_back({static_cast<int>(l), static_cast<int>(d), v});
            }
        }
    }
    std::sort(candidates.begin(), candidates.end(), [&](const MatchPair& a, const MatchPair& b) {
        if (a.iou != b.iou) {
            return a.iou > b.iou;
        }
        const Detection& da = detections[static_cast<std::size_t>(a.detection_index)];
        const Detection& db = detections[static_cast<std::size_t>(b.detection_index)];
        if (da.score != db.score) {
            return da.score > db.score;
        }
        if (da.id != db.id) {
            return da.id < db.id;
        }
        return a.live_index < b.live_index;
    });

    std::vector<bool> live_used(live_tails.size(), false);
    std::vector<bool> det_used(detections.size(), false);
    std::vector<MatchPair> matches;
    for (const MatchPair& c : candidates) {
        const auto li = static_cast<std::size_t>(c.live_index);
        const auto di = static_cast<std::size_t>(c.detection_index);
        if (live_used[li] || det_used[di]) {
            continue;
        }
        live_used[li] = true;
        det_used[di] = true;
        matches.push_back(c);
    }
    return matches;
}

StepResult TrackletStore::step(const FrameDetections& frame, double join_threshold) {
    if (frame.frame != last_frame_ + 1) {
        throw StructuralError("tracklet store expected frame " + std::to_string(last_frame_ + 1) + ", got " +
                              std::to_string(frame.frame));
    }
    StepResult result;
    result.frame = frame.frame;

    std::vector<BoundingBox> tails;
    tails.reserve(live_.size());
    for (int id : live_) {
        tails.push_back(tracklet(id).last().box);
    }
    const std::vector<MatchPair> matches = greedy_match(tails, frame.detections, join_threshold);

    std::vector<int> det_to_tracklet(frame.detections.size(), -1);
    std::vector<bool> live_extended(live_.size(), false);
    for (const MatchPair& m : matches) {
        const int id = live_[static_cast<std::size_t>(m.live_index)];
        det_to_tracklet[static_cast<std::size_t>(m.detection_index)] = id;
        live_extended[static_cast<std::size_t>(m.live_index)] = true;
    }

    std::vector<int> next_live;
    for (std::size_t l = 0; l < live_.size(); ++l) {
        if (live_extended[l]) {
            result.extended.push_back(live_[l]);
            next_live.push_back(live_[l]);
        } else {
            result.closed.push_back(live_[l]);
        }
    }

    for (std::size_t d = 0; d < frame.detections.size(); ++d) {
        const Detection& det = frame.detections[d];
        int id = det_to_tracklet[d];
        if (id >= 0) {
            tracklets_[static_cast<std::size_t>(id)].detections.push_back(det);
        } else {
            id = next_id();
            tracklets_.push_back(Tracklet{id, {det}});
            result.created.push_back(id);
            next_live.push_back(id);
        }
        result.assignments.push_back({det.id, id});
    }

    std::sort(result.extended.begin(), result.extended.end());
    std::sort(next_live.begin(), next_live.end());
    live_ = std::move(next_live);
    last_frame_ = frame.frame;

#ifndef NDEBUG
    for (int id : result.extended) {
        check_tracklet(tracklet(id), join_threshold);
    }
#endif
    return result;
}

}  // namespace boltrack
