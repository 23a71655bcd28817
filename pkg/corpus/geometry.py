def manhattan(p, q):
    total = 0
    for a, b in zip(p, q):
        total += abs(a - b)
    return total


def bounding_box(points):
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return (min(xs), min(ys), max(xs), max(ys))


def scale(points, factor):
    scaled = []
    for x, y in points:
        scaled.append((x * factor, y * factor))
    return scaled


def centroid(points):
    sx = sum(p[0] for p in points)
    sy = sum(p[1] for p in points)
    return (sx / len(points), sy / len(points))


def clamp(value, low, high):
    if value < low:
        return low
    if value > high:
        return high
    return value
