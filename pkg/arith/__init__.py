"""Integer and quadratic-character arithmetic for RankSpike."""
