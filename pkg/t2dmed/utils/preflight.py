"""
Preflight checks run before an experiment.
"""
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional, Union

from t2dmed.config.pipeline_config import PipelineConfig
from t2dmed.config.validator import ConfigValidator


class PreflightManager:
    """Checks that a run can start: configuration, data, output location, numeric stack."""

    @classmethod
    def run_preflight_checks(cls, config: PipelineConfig, output_dir: Optional[Union[str, Path]] = None,
                             verbose: bool = True) -> bool:
        """Run every check; True when none failed."""
        if verbose:
            print("🚀 Running preflight checks...\n")

        checks = [
            ("Configuration", lambda: cls._check_configuration(config)),
            ("Data Source", lambda: cls._check_data_source(config)),
            ("Output Directory", lambda: cls._check_output_dir(output_dir or config.output_dir)),
            ("Numeric Stack", cls._check_numeric_stack),
        ]

        all_passed = True
        for check_name, check_func in checks:
            try:
                result = check_func()
            except Exception as e:
                result = {'success': False, 'errors': [f"{check_name} check raised: {e}"]}

            if verbose:
                status = "✅" if result['success'] else "❌"
                print(f"{status} {check_name}: {'OK' if result['success'] else 'FAILED'}")
                for detail in result.get('details', []):
                    print(f"   • {detail}")
                for warning in result.get('warnings', []):
                    print(f"   ⚠️  {warning}")
                for error in result.get('errors', []):
                    print(f"   • {error}")
            all_passed = all_passed and result['success']

        if verbose:
            print()
            print("✅ All preflight checks passed." if all_passed else "❌ Some preflight checks failed.")
        return all_passed

    @classmethod
    def _check_configuration(cls, config: PipelineConfig) -> Dict[str, Any]:
        report = ConfigValidator.get_validation_report(config)
        return {
            'success': True,
            'details': [f"Models: {', '.join(report['model_kinds'])}",
                        f"Config digest: {report['config_digest'][:12]}"],
            'warnings': report['warnings'],
        }

    @classmethod
    def _check_data_source(cls, config: PipelineConfig) -> Dict[str, Any]:
        errors = ConfigValidator.validate_data_source(config)
        if errors:
            return {'success': False, 'errors': errors}
        if config.data.csv_path is not None:
            return {'success': True, 'details': [f"CSV {config.data.csv_path}"]}
        gen = config.data.generator
        return {'success': True,
                'details': [f"Synthetic cohort: {gen.n_rows} rows, noise {gen.noise_rate}, "
                            f"missing {gen.missing_rate}"]}

    @classmethod
    def _check_output_dir(cls, output_dir: Optional[Union[str, Path]]) -> Dict[str, Any]:
        if not output_dir:
            return {'success': True, 'warnings': ['No output directory configured; nothing will be written']}
        path = Path(output_dir)
        existing_dir = path
        while not existing_dir.exists() and existing_dir != existing_dir.parent:
            existing_dir = existing_dir.parent
        if not os.access(existing_dir, os.W_OK):
            return {'success': False, 'errors': [f"{existing_dir} is not writable"]}
        if path.exists():
            try:
                with tempfile.NamedTemporaryFile(dir=path):
                    pass
            except OSError as e:
                return {'success': False, 'errors': [f"Cannot write to {path}: {e}"]}
        return {'success': True, 'details': [f"Output directory {path}"]}

    @classmethod
    def _check_numeric_stack(cls) -> Dict[str, Any]:
        import matplotlib
        import numpy
        import pandas
        import pydantic

        return {
            'success': True,
            'details': [f"numpy {numpy.__version__}", f"pandas {pandas.__version__}",
                        f"matplotlib {matplotlib.__version__}", f"pydantic {pydantic.VERSION}"],
        }
