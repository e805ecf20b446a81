"""
Synthetic patient cohort with a known medication rule.

Each patient carries twelve features: seven numeric measurements and five
two-valued categorical ones.

Feature draws, label noise and blanked cells each use their own PRNG
stream derived from the settings seed, so changing one knob never shifts
the others.
"""
import logging
from typing import Dict, List, Optional

import numpy as np

from t2dmed.config.pipeline_config import GeneratorSettings
from t2dmed.models.table import Column, ColumnSchema, Table
from t2dmed.utils.errors import ParameterError
from t2dmed.utils.rng import XorShift64Star, make_rng

logger = logging.getLogger(__name__)

DIET = 'Diet and Lifestyle Modification'
SECRETAGOGUES = 'Secretagogues'
BIGUANIDES = 'Biguanides'
INSULIN = 'Insulin'
MEDICATIONS = [DIET, SECRETAGOGUES, BIGUANIDES, INSULIN]

IDENTIFIER = 'Name of patient'
TARGET = 'Medications'

# name -> (low, high) for uniform numeric draws
NUMERIC_RANGES: Dict[str, tuple] = {
    'Fasting': (70.0, 250.0),
    '2 Hours after Glucose Load': (100.0, 400.0),
    'BMI': (15.0, 45.0),
    'Duration': (0.0, 25.0),
    'Age': (30.0, 75.0),
    'Blood Pressure': (90.0, 180.0),
    'Plasma Creatinine': (0.5, 2.5),
}

# name -> (first label, second label, P(second label))
BINARY_FEATURES: Dict[str, tuple] = {
    'Sex': ('Female', 'Male', 0.5),
    'High Cholesterols': ('No', 'Yes', 0.35),
    'Heart Diseases': ('No', 'Yes', 0.2),
    'Kidney Diseases': ('No', 'Yes', 0.15),
    'Vision Problems': ('No', 'Yes', 0.25),
}

FEATURE_ORDER = [
    'Fasting', '2 Hours after Glucose Load', 'BMI', 'Duration', 'Age', 'Sex',
    'Blood Pressure', 'High Cholesterols', 'Heart Diseases', 'Kidney Diseases',
    'Plasma Creatinine', 'Vision Problems',
]

# Features the planted rule reads
RULE_FEATURES = [
    'Kidney Diseases', 'Fasting', '2 Hours after Glucose Load', 'Duration',
    'BMI', 'High Cholesterols', 'Heart Diseases',
]


def cohort_schema() -> List[ColumnSchema]:
    """Identifier, twelve features and the medication target, in file order."""
    schema = [ColumnSchema(IDENTIFIER, 'categorical', 'identifier')]
    for name in FEATURE_ORDER:
        kind = 'numeric' if name in NUMERIC_RANGES else 'categorical'
        schema.append(ColumnSchema(name, kind, 'feature'))
    schema.append(ColumnSchema(TARGET, 'categorical', 'target'))
    return schema


def planted_medication(row: Dict[str, object]) -> str:
    """
    Decision list mapping a patient to a medication; first match wins.
    """
    if row['Kidney Diseases'] == 'Yes':
        return INSULIN
    if row['Fasting'] >= 200.0 or row['2 Hours after Glucose Load'] >= 340.0:
        return INSULIN
    if row['Fasting'] < 126.0:
        return DIET
    if row['Duration'] >= 15.0:
        return INSULIN
    if row['BMI'] >= 30.0 or row['High Cholesterols'] == 'Yes' or row['Heart Diseases'] == 'Yes':
        return BIGUANIDES
    return SECRETAGOGUES


class CohortGenerator:
    """Builds seeded synthetic cohorts."""

    def generate_cohort(self, settings: GeneratorSettings, seed: Optional[int] = None) -> Table:
        """
        Draw ``settings.n_rows`` patients and label them with the planted rule.

        Args:
            settings: Row count, label-noise rate, missing-cell rate and seed
            seed: Fallback seed when ``settings.seed`` is unset

        Returns:
            14-column Table (identifier, 12 features, target)
        """
        if settings.n_rows < 1:
            raise ParameterError(f"n_rows must be >= 1, got {settings.n_rows}")
        if not 0.0 <= settings.noise_rate < 1.0:
            raise ParameterError(f"noise_rate must be in [0, 1), got {settings.noise_rate}")
        base_seed = settings.seed if settings.seed is not None else (seed or 0)
        draws = make_rng(base_seed, 'cohort', 'features')
        noise = make_rng(base_seed, 'cohort', 'noise')
        blanks = make_rng(base_seed, 'cohort', 'missing')

        rows = [self._draw_patient(draws) for _ in range(settings.n_rows)]
        labels = []
        flipped = 0
        for row in rows:
            label = planted_medication(row)
            if noise.bernoulli(settings.noise_rate):
                label = self._other_label(noise, label)
                flipped += 1
            labels.append(label)

        schema = cohort_schema()
        columns = {IDENTIFIER: Column.categorical([f"Patient {i + 1:05d}" for i in range(len(rows))])}
        for col in schema[1:-1]:
            if col.kind == 'numeric':
                values = np.array([row[col.name] for row in rows], dtype=np.float64)
                missing = np.array([blanks.bernoulli(settings.missing_rate) for _ in rows], dtype=bool) \
                    if settings.missing_rate > 0 else np.zeros(len(rows), dtype=bool)
                columns[col.name] = Column.numeric(values, missing)
            else:
                columns[col.name] = Column.categorical([row[col.name] for row in rows])
        columns[TARGET] = Column.categorical(labels)

        logger.info(f"Generated cohort of {settings.n_rows} patients "
                    f"({flipped} noisy labels, seed={base_seed})")
        return Table(schema, columns)

    def _draw_patient(self, rng: XorShift64Star) -> Dict[str, object]:
        row: Dict[str, object] = {}
        for name in FEATURE_ORDER:
            if name in NUMERIC_RANGES:
                low, high = NUMERIC_RANGES[name]
                row[name] = round(rng.uniform(low, high), 1)
            else:
                first, second, p = BINARY_FEATURES[name]
                row[name] = second if rng.bernoulli(p) else first
        return row

    def _other_label(self, rng: XorShift64Star, label: str) -> str:
        others = [m for m in MEDICATIONS if m != label]
        return others[rng.randbelow(len(others))]


# Global generator instance
cohort_generator = CohortGenerator()
