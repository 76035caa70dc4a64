#!/usr/bin/env python3
"""Generate the bundled demo corpus (data/synthetic_tweets.csv).

200 short messages from two dozen users over eight weeks, spread across ten
everyday topics, with enough @mentions, links and punctuation to exercise the
text cleanup path. Deterministic: rerunning reproduces the file byte for byte.
"""

import csv
import random
from datetime import datetime, timedelta
from pathlib import Path

TOPICS = {
    "cooking": ["sourdough", "risotto", "braise", "saute", "paprika",
                "skillet", "marinade", "simmer"],
    "gardening": ["tomato", "seedling", "compost", "mulch", "perennial",
                  "trellis", "pruning", "soil"],
    "astronomy": ["telescope", "nebula", "jupiter", "eclipse", "meteor",
                  "galaxy", "stargazing", "aperture"],
    "cycling": ["derailleur", "peloton", "cadence", "gravel", "saddle",
                "descent", "headwind", "crankset"],
    "chess": ["gambit", "endgame", "zugzwang", "castling", "blitz",
              "sicilian", "checkmate", "sacrifice"],
    "photography": ["bokeh", "shutter", "tripod", "exposure", "lightroom",
                    "portrait", "focal", "grain"],
    "jazz": ["saxophone", "bebop", "improvisation", "quartet", "trumpet",
             "swing", "chord", "vinyl"],
    "hiking": ["summit", "switchback", "ridgeline", "trailhead", "scramble",
               "basecamp", "elevation", "traverse"],
    "pottery": ["glaze", "kiln", "stoneware", "wheel", "slip", "bisque",
                "trimming", "porcelain"],
    "coffee": ["espresso", "pourover", "roast", "grinder", "crema",
               "aeropress", "barista", "tamping"],
}

FILLER = ["really", "finally", "today", "morning", "weekend", "trying",
          "learning", "practice", "session", "project", "favorite",
          "perfect", "almost", "another", "great", "small", "fresh",
          "first", "sharing", "notes"]

USERS = ["mara_lindqvist", "jonas.petterson", "aveline_r", "tom_okafor",
         "sylvie.marchand", "dmitri_k", "helena_vos", "rafa_moreno",
         "ines.baptista", "kenji_w", "petra_novak", "callum_doyle",
         "yuki.tanabe", "oskar_lehtinen", "bianca_ferri", "lars.holm",
         "noor_haddad", "gavin_mcallister", "zofia_k", "ethan.brook",
         "camille_d", "ravi_menon", "freya_jens", "marco.valenti"]

URLS = ["https://example.com/post/{}", "http://blog.example.org/{}",
        "https://photos.example.net/a/{}"]


def make_text(rng, topic, other_topic):
    words = rng.sample(TOPICS[topic], k=rng.randint(2, 4))
    if other_topic and rng.random() < 0.3:
        words += rng.sample(TOPICS[other_topic], k=1)
    words += rng.sample(FILLER, k=rng.randint(2, 5))
    rng.shuffle(words)
    if rng.random() < 0.18:
        words.insert(rng.randrange(len(words)),
                     "@" + rng.choice(USERS).split(".")[0].split("_")[0])
    if rng.random() < 0.15:
        words.append(rng.choice(URLS).format(rng.randint(100, 999)))
    text = " ".join(words)
    if rng.random() < 0.3:
        text = text[0].upper() + text[1:]
    tail = rng.choice(["", "!", ".", "...", ", at last", "?"])
    return text + tail


def main():
    rng = random.Random(42)
    topic_names = list(TOPICS)
    # Each user leans on one or two topics so the factorization has
    # structure to find.
    leanings = {}
    for i, user in enumerate(USERS):
        primary = topic_names[i % len(topic_names)]
        secondary = rng.choice([t for t in topic_names if t != primary])
        leanings[user] = (primary, secondary)

    start = datetime(2024, 3, 4, 6, 0, 0)
    rows = []
    for _ in range(200):
        user = rng.choice(USERS)
        primary, secondary = leanings[user]
        topic = primary if rng.random() < 0.75 else secondary
        stamp = start + timedelta(days=rng.randint(0, 55),
                                  hours=rng.randint(0, 17),
                                  minutes=rng.randint(0, 59),
                                  seconds=rng.randint(0, 59))
        rows.append((user, stamp.strftime("%Y-%m-%d %H:%M:%S"),
                     make_text(rng, topic, secondary)))
    rows.sort(key=lambda r: r[1])

    out = Path(__file__).resolve().parent.parent / "data" / "synthetic_tweets.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["username", "timestamp", "tweet_text"])
        writer.writerows(rows)
    print(f"wrote {len(rows)} tweets to {out}")


if __name__ == "__main__":
    main()
