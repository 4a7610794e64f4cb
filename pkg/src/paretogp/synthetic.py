"""Synthetic datasets: a correlated-input driver benchmark and a wind-farm-like
pair of time series (half-hourly weather, five-minute energy output)."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pandas as pd

from .data import AlignedDataset

WEATHER_COLUMNS = (
    "temperature", "apparentTemperature", "dewPoint", "relativeHumidity",
    "wetBulbDepression", "windSpeed", "windGust", "windSpeed2", "windGust2",
    "pressureQNH", "rainSince9am",
)


def correlated_benchmark(n: int = 600, seed: int = 0, n_inputs: int = 16,
                         drivers: tuple = (2, 5), noise: float = 0.02,
                         loading: float = 0.9) -> AlignedDataset:
    """``n_inputs`` correlated columns; the response depends on ``drivers`` only.

    Columns form four groups sharing a latent factor; within-group correlation
    is ``loading**2`` (0.81 by default).  With ``a, b`` the two driver columns
    the response is ``a + 0.05 * b**2`` plus Gaussian noise of ``noise`` times
    its std.
    """
    rng = np.random.default_rng(seed)
    latent = rng.standard_normal((n, 4))
    X = np.empty((n, n_inputs))
    for j in range(n_inputs):
        X[:, j] = loading * latent[:, j % 4] + np.sqrt(1 - loading**2) * rng.standard_normal(n)
    X = 10.0 + 3.0 * X
    a, b = (X[:, d] for d in drivers)
    signal = a + 0.05 * b**2
    y = signal + noise * signal.std() * rng.standard_normal(n)
    names = tuple(f"x{j}" for j in range(n_inputs))
    stamps = pd.date_range("2010-10-01", periods=n, freq="30min", tz="UTC")
    return AlignedDataset(names, X, y, stamps, "y", "UTC")


def _ar1(rng, n, phi, sigma):
    out = np.empty(n)
    out[0] = rng.normal(0, sigma / np.sqrt(1 - phi**2))
    eps = rng.normal(0, sigma, n)
    for i in range(1, n):
        out[i] = phi * out[i - 1] + eps[i]
    return out


def wind_power(gust2, dew):
    """Farm output in MW: a logistic power curve in windGust2 shifted by dewPoint."""
    z = (gust2 - 28.0 + 0.6 * (dew - 8.0)) / 6.0
    return 140.0 / (1.0 + np.exp(-z))


def wind_farm_series(start: str = "2010-10-01", end: str = "2011-08-01", seed: int = 0):
    """Return ``(weather, energy)`` DataFrames on a true UTC timeline.

    Weather is half-hourly with occasional off-grid special observations,
    duplicate rows, blank cells, a mostly empty ``pressureMSL`` and a text
    ``windDirection``; energy is every five minutes.
    """
    rng = np.random.default_rng(seed)
    t5 = pd.date_range(start, end, freq="5min", tz="UTC", inclusive="left")
    n = len(t5)
    days = (t5 - t5[0]).total_seconds().to_numpy() / 86400.0
    hour = t5.tz_convert("Australia/Hobart").hour.to_numpy()
    season = np.cos(2 * np.pi * (days - 100) / 365.0)
    diurnal = np.sin(2 * np.pi * (hour - 9) / 24.0)

    speed = np.clip(30 + 14 * np.tanh(_ar1(rng, n, 0.995, 1.4) / 12) * 1.8, 0, 100)
    gust = speed * 1.25 + np.abs(_ar1(rng, n, 0.9, 1.0)) * 2.0
    temp = 13 + 4 * season + 3 * diurnal + _ar1(rng, n, 0.995, 0.15)
    dew = temp - 3.5 - np.abs(_ar1(rng, n, 0.995, 0.2)) * 2.0
    rh = np.clip(100 - 5 * (temp - dew), 40, 100)
    qnh = 1012 + _ar1(rng, n, 0.999, 0.3)
    rain_rate = np.where(_ar1(rng, n, 0.99, 0.2) > 1.2, 0.05, 0.0)
    day_key = (t5.tz_convert("Australia/Hobart") - pd.Timedelta(hours=9)).date
    rain = pd.Series(rain_rate).groupby(pd.Index(day_key)).cumsum().to_numpy()

    weather = pd.DataFrame({
        "time": t5,
        "temperature": temp.round(1),
        "apparentTemperature": (temp - 0.08 * speed).round(1),
        "dewPoint": dew.round(1),
        "relativeHumidity": rh.round(0),
        "wetBulbDepression": ((temp - dew) / 3).round(1),
        "windSpeed": (speed * 1.852).round(0),
        "windGust": (gust * 1.852).round(0),
        "windSpeed2": speed.round(0),
        "windGust2": gust.round(0),
        "pressureQNH": qnh.round(1),
        "rainSince9am": rain.round(1),
    })
    power = wind_power(gust, dew) + rng.normal(0, 4.0, n)
    energy = pd.DataFrame({"time": t5, "output": np.clip(power, 0, 140).round(2)})

    weather = weather[weather["time"].dt.minute.isin((0, 30))].reset_index(drop=True)
    weather["pressureMSL"] = np.where(rng.random(len(weather)) < 0.8, np.nan,
                                      weather["pressureQNH"] - 0.3)
    dirs = np.array(["N", "NE", "E", "SE", "S", "SW", "W", "NW", "WNW", "CALM"])
    weather["windDirection"] = dirs[rng.integers(len(dirs), size=len(weather))]

    cols = [c for c in WEATHER_COLUMNS]
    blanks = rng.random((len(weather), len(cols))) < 0.005
    for j, c in enumerate(cols):
        weather.loc[blanks[:, j], c] = np.nan
    special = weather.sample(frac=0.01, random_state=seed).copy()
    special["time"] = special["time"] + pd.Timedelta(minutes=17)
    dups = weather.sample(frac=0.01, random_state=seed + 1)
    weather = pd.concat([weather, special, dups]).sort_values("time", kind="stable")
    return weather.reset_index(drop=True), energy


def write_wind_demo(out_dir, start: str = "2010-10-01", end: str = "2011-08-01",
                    test_start: str = "2011-07-01", seed: int = 0) -> Path:
    """Write ``weather.csv``, ``energy.csv`` and a ready-to-run ``config.json``.

    Weather stamps are local Hobart time; energy stamps are fixed UTC+10
    (market time).  Returns the config path.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    weather, energy = wind_farm_series(start, end, seed)
    w = weather.copy()
    w["time"] = w["time"].dt.tz_convert("Australia/Hobart").dt.strftime("%d/%m/%Y %H:%M")
    w.to_csv(out / "weather.csv", index=False, na_rep="-", float_format="%.10g")
    e = energy.copy()
    e["time"] = e["time"].dt.tz_convert("Etc/GMT-10").dt.strftime("%Y-%m-%d %H:%M")
    e.to_csv(out / "energy.csv", index=False, float_format="%.10g")
    config = {
        "predictors": {"path": "weather.csv", "timestamp_column": "time",
                       "timestamp_format": "%d/%m/%Y %H:%M", "timezone": "Australia/Hobart"},
        "response": {"path": "energy.csv", "timestamp_column": "time",
                     "timestamp_format": "%Y-%m-%d %H:%M", "timezone": "Etc/GMT-10",
                     "column": "output"},
        "timezone": "Etc/GMT-10",
        "train_range": [start, test_start],
        "test_range": [test_start, end],
        "stage2_variables": ["windGust2", "dewPoint"],
        "out": "out",
        "seed": seed,
    }
    path = out / "config.json"
    path.write_text(json.dumps(config, indent=1) + "\n")
    return path
