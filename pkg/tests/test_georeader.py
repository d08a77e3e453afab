import dataclasses
import math

import numpy as np
import pytest

from clockforge.errors import ImageTooSmall, InsufficientHands, NoCircleSupport
from clockforge.georeader import (
    HandEstimate,
    candidates_from_hands,
    detect_center,
    extract_hands,
    hand_edges,
    hough_lines,
    ink_mask,
    locate_dial,
    overlapping_candidates,
    read_time,
    sobel_edges,
)
from clockforge.homography import Homography, warp_image
from clockforge.raster import Canvas, Capsule, SuperEllipse
from clockforge.synclock import AugmentParams, HandStyle, augment, extra_hand_angles, face_geometry, render_clock, simple_style
from clockforge.timecore import ClockTime, angular_difference, decode_angles, encode_time


def render(h, m, style=None):
    return render_clock(style or simple_style(), ClockTime(h, m))


def hands_of(img):
    e = sobel_edges(img)
    dial = locate_dial(img, e)
    lines = hough_lines(hand_edges(e, dial), 8)
    cut = max(8, math.ceil(0.3 * lines[0].votes))
    return extract_hands([l for l in lines if l.votes >= cut], dial, img, ink_mask(e.gray, dial))


# ---------------------------------------------------------------- edges


def test_constant_image_has_no_edges():
    e = sobel_edges(np.full((20, 20, 3), 77, np.uint8))
    assert (e.magnitude == 0).all()


def test_vertical_step():
    img = np.zeros((20, 20), np.uint8)
    img[:, 10:] = 255
    e = sobel_edges(np.repeat(img[..., None], 3, axis=2))
    cols = e.magnitude.max(axis=0)
    assert set(np.flatnonzero(cols == cols.max())) == {9, 10}
    assert np.allclose(e.orientation[5, 9:11], 0.0)


def test_disk_edges_on_annulus():
    cv = Canvas(80, 80, (0, 0, 0))
    cv.draw(SuperEllipse((39.5, 39.5), 25.0, 25.0), (255, 255, 255))
    e = sobel_edges(cv.to_image())
    Y, X = np.mgrid[0:80, 0:80]
    r = np.hypot(X - 39.5, Y - 39.5)
    strong = e.magnitude >= 0.3 * e.magnitude.max()
    assert (np.abs(r[strong] - 25) <= 2).all()
    assert e.magnitude[np.abs(r - 25) <= 2].sum() > 0.99 * e.magnitude.sum()


def test_too_small():
    with pytest.raises(ImageTooSmall):
        sobel_edges(np.zeros((7, 30, 3), np.uint8))


# ---------------------------------------------------------------- hough


def _line_image(p0, p1, size=100):
    cv = Canvas(size, size, (255, 255, 255))
    cv.draw(Capsule(p0, p1, 0.5), (0, 0, 0))
    return cv.to_image()


def _rho_theta(p0, p1, size=100):
    c = (size - 1) / 2
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    theta = math.atan2(dx, -dy) % math.pi  # normal direction
    rho = (p0[0] - c) * math.cos(theta) + (p0[1] - c) * math.sin(theta)
    return rho, theta


def test_single_segment_recovered():
    p0, p1 = (15.0, 20.0), (80.0, 70.0)
    top = hough_lines(sobel_edges(_line_image(p0, p1)), 10)[0]
    rho, theta = _rho_theta(p0, p1)
    assert abs(top.rho - rho) <= 2
    assert angular_difference(math.degrees(top.theta), math.degrees(theta)) <= 1


def test_blank_map_has_no_lines():
    assert hough_lines(sobel_edges(np.full((30, 30, 3), 9, np.uint8)), 1) == []


def test_perpendicular_segments():
    cv = Canvas(100, 100, (255, 255, 255))
    cv.draw(Capsule((10.0, 30.0), (90.0, 30.0), 1.0), (0, 0, 0))
    cv.draw(Capsule((60.0, 10.0), (60.0, 90.0), 1.0), (0, 0, 0))
    lines = hough_lines(sobel_edges(cv.to_image()), 10)
    # each stroke has two edge lines, so look at the top two direction clusters
    first = math.degrees(lines[0].theta)
    other = next(l for l in lines[:4] if angular_difference(math.degrees(l.theta), first) > 5)
    assert abs(angular_difference(math.degrees(other.theta), first) - 90) <= 1


def test_vote_counts_monotone_in_threshold():
    e = sobel_edges(render(4, 20))
    prev = None
    for thr in (5, 10, 20, 40, 80):
        votes = sorted(l.votes for l in hough_lines(e, thr))
        assert all(v >= thr for v in votes)
        if prev is not None:
            assert len(votes) <= len(prev)
            assert set(votes) <= set(prev)
        prev = votes


# ---------------------------------------------------------------- dial


def test_detect_center_on_render():
    style = simple_style()
    geo = face_geometry(style, 224)
    d = detect_center(render(10, 31))
    assert math.hypot(d.cx - geo.center[0], d.cy - geo.center[1]) <= 2
    assert abs(d.radius - geo.outer.rx) <= 0.05 * geo.outer.rx


def test_detect_center_tracks_translation():
    shift = 0.05 * 224
    img = warp_image(render(2, 5), Homography.translation(shift, 0), fill=(200, 200, 200))
    d = detect_center(img)
    assert math.hypot(d.cx - (111.5 + shift), d.cy - 111.5) <= 3


def test_blank_image_falls_back():
    blank = np.full((100, 100, 3), 128, np.uint8)
    with pytest.raises(NoCircleSupport):
        detect_center(blank)
    d = locate_dial(blank)
    assert d.fallback and (d.cx, d.cy, d.radius) == (49.5, 49.5, 40.0)


# ---------------------------------------------------------------- hands


def test_ten_thirty_one_hand_angles():
    hour, minute = hands_of(render(10, 31))
    assert angular_difference(hour.angle, 315.5) <= 3
    assert angular_difference(minute.angle, 186) <= 3
    assert minute.length > hour.length > 0


def test_noon_is_one_cluster():
    with pytest.raises(InsufficientHands) as err:
        hands_of(render(0, 0))
    assert len(err.value.candidates) == 1
    res = read_time(render(0, 0))
    assert res.overlapping and res.top1 == 0


def test_second_hand_rejected_as_thinnest():
    base = simple_style()
    hands = dict(base.hands, second=HandStyle(0.85, 0.15, 1.5, (0, 0, 0)))
    style = dataclasses.replace(base, hands=hands)
    t = ClockTime(10, 31)
    # the distractor must not overlap either real hand for this check
    sa = extra_hand_angles(style, t)["second"]
    assert min(angular_difference(sa, 315.5), angular_difference(sa, 186)) > 20
    hour, minute = hands_of(render_clock(style, t))
    assert angular_difference(hour.angle, 315.5) <= 3
    assert angular_difference(minute.angle, 186) <= 3
    assert read_time(render_clock(style, t)).top1 == encode_time(t)


# ---------------------------------------------------------------- reading


def test_read_four_forty_five():
    assert read_time(render(4, 45)).top1 == encode_time(ClockTime(4, 45))


def test_result_structure():
    res = read_time(render(8, 17))
    classes = res.classes
    scores = [s for _, s in res.candidates]
    assert 1 <= len(classes) <= 3 and len(set(classes)) == len(classes)
    assert all(0 <= s <= 1 for s in scores)
    assert scores == sorted(scores, reverse=True)
    hour, minute = res.hands
    assert classes[1] == decode_angles(minute.angle, hour.angle)


def test_candidates_from_hands_rank3_neighbour():
    # minute hand slightly past the mark -> the +1 neighbour is rank 3
    ranks = candidates_from_hands(HandEstimate(95.0, 40, 7), HandEstimate(61.0, 60, 4))
    assert [c for c, _ in ranks] == [190, decode_angles(61.0, 95.0), 191]
    ranks = candidates_from_hands(HandEstimate(95.0, 40, 7), HandEstimate(59.5, 60, 4))
    assert ranks[2][0] == 189


def test_overlapping_candidates_best_is_aligned():
    ranks = overlapping_candidates(0.0)
    assert ranks[0][0] == 0
    assert len(ranks) == 3


@pytest.mark.parametrize("bias", [-10, -4, 3, 10])
def test_bias_invariance(bias):
    img = render(7, 22)
    jittered = augment(img, 0, AugmentParams.fixed(bias=float(bias)))
    assert read_time(jittered).top1 == read_time(img).top1


@pytest.mark.parametrize("k", [1, 2, 3])
def test_rotation_shifts_hands(k):
    img = render(1, 50)
    hour, minute = hands_of(img)
    # np.rot90 turns counter-clockwise; clock angles run clockwise
    rh, rm = hands_of(np.ascontiguousarray(np.rot90(img, k=k)))
    assert angular_difference(rh.angle, hour.angle - 90 * k) <= 2
    assert angular_difference(rm.angle, minute.angle - 90 * k) <= 2


def test_blank_image_reads_nothing():
    res = read_time(np.full((64, 64, 3), 255, np.uint8))
    assert res.candidates == () and res.top1 is None
