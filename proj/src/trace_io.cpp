#include "magiclens/csv.hpp"
#include "magiclens/tracksim.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace magiclens {

void write_trace_csv(std::ostream& os, const HeadTrace& trace)
{
    using csv::format;
    os << kTraceCsvHeader << '\n';
    for (const TraceFrame& f : trace.frames) {
        const Quat& q = f.device_rotation;
        os << f.index << ',' << format(f.t_ms) << ',' << format(f.eye_mm.x()) << ','
           << format(f.eye_mm.y()) << ',' << format(f.eye_mm.z()) << ',' << format(f.ipd_mm) << ','
           << format(q.w()) << ',' << format(q.x()) << ',' << format(q.y()) << ','
           << format(q.z()) << ',' << format(f.device_translation_mm.x()) << ','
           << format(f.device_translation_mm.y()) << ',' << format(f.device_translation_mm.z())
           << '\n';
    }
}

HeadTrace read_trace_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || csv::trim(line) != kTraceCsvHeader)
        throw std::runtime_error("trace csv: missing or unexpected header");

    HeadTrace trace;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (csv::trim(line).empty())
            continue;
        const auto fields = csv::split(csv::trim(line));
        if (fields.size() != 13)
            throw std::runtime_error("trace csv line " + std::to_string(lineno) +
                                     ": expected 13 fields, got " + std::to_string(fields.size()));
        try {
            TraceFrame f;
            f.index = csv::parse_int(fields[0]);
            f.t_ms = csv::parse_double(fields[1]);
            f.eye_mm = {csv::parse_double(fields[2]), csv::parse_double(fields[3]),
                        csv::parse_double(fields[4])};
            f.ipd_mm = csv::parse_double(fields[5]);
            f.device_rotation = Quat(csv::parse_double(fields[6]), csv::parse_double(fields[7]),
                                     csv::parse_double(fields[8]), csv::parse_double(fields[9]));
            f.device_translation_mm = {csv::parse_double(fields[10]), csv::parse_double(fields[11]),
                                       csv::parse_double(fields[12])};
            if (!(f.eye_mm.z() > 0))
                throw std::invalid_argument("eye_z_mm must be > 0");
            if (!(f.device_rotation.norm() > 0))
                throw std::invalid_argument("device quaternion is zero");
            if (!trace.frames.empty() && !(f.t_ms > trace.frames.back().t_ms))
                throw std::invalid_argument("timestamps must be strictly increasing");
            trace.frames.push_back(f);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("trace csv line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (trace.frames.empty())
        throw std::runtime_error("trace csv: no frames");
    if (trace.frames.size() > 1)
        trace.rate_hz = 1000.0 / (trace.frames[1].t_ms - trace.frames[0].t_ms);
    return trace;
}

}  // namespace magiclens
