# differentiation/management/base.py
"""Общая основа команд конвейера: --workdir, --config, --seed и коды возврата."""
import json
import logging
from pathlib import Path
from typing import Optional, Tuple

from django.core.management.base import BaseCommand, CommandError

from ..exceptions import ConfigError, PipelineError

logger = logging.getLogger(__name__)


class PipelineCommand(BaseCommand):
    """
    Значения берутся из флагов, затем из JSON-файла --config (флаги важнее).
    PipelineError превращается в CommandError с кодом 2 / 3 / 4.
    """

    def add_arguments(self, parser):
        parser.add_argument('--workdir', default='.', help='Каталог, относительно которого задаются все пути')
        parser.add_argument('--config', help='JSON-файл с параметрами; флаги командной строки важнее')
        parser.add_argument('--seed', type=int, help='Зерно генератора случайных чисел')
        self.add_pipeline_arguments(parser)

    def add_pipeline_arguments(self, parser):
        pass

    def add_data_arguments(self, parser):
        """Источник данных: манифест или синтетическая когорта."""
        parser.add_argument('--manifest', help='CSV-манифест subject_id,label,icn_path[,fnc_path]')
        parser.add_argument('--fs', type=float, help='Частота дискретизации ICN, Гц')
        parser.add_argument('--synth-n', type=int, dest='synth_n', help='Размер синтетической когорты')
        parser.add_argument('--synth-seed', type=int, dest='synth_seed', help='Зерно синтетической когорты')
        parser.add_argument('--snr-db', type=float, dest='snr_db', help='SNR синусоиды класса, дБ')

    def handle(self, *args, **options):
        self.workdir = Path(options['workdir']).resolve()
        try:
            self.file_config = self.load_config(options.get('config'))
            self.options = options
            return self.run()
        except PipelineError as exc:
            logger.error('%s', exc)
            raise CommandError(str(exc), returncode=exc.exit_code) from exc

    def run(self):
        raise NotImplementedError

    def load_config(self, path: Optional[str]) -> dict:
        if not path:
            return {}
        config_path = self.resolve(path)
        if not config_path.is_file():
            raise ConfigError(f'Файл конфигурации не найден: {config_path}')
        try:
            data = json.loads(config_path.read_text(encoding='utf-8'))
        except json.JSONDecodeError as exc:
            raise ConfigError(f'{config_path}: неверный JSON ({exc})') from None
        if not isinstance(data, dict):
            raise ConfigError(f'{config_path}: ожидался JSON-объект')
        return data

    def value(self, name: str, default=None, key: Optional[str] = None):
        """Флаг, если задан; иначе ключ из --config; иначе default."""
        flag = self.options.get(name)
        if flag is not None:
            return flag
        return self.file_config.get(key or name, default)

    def resolve(self, path) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.workdir / path

    def data_source(self) -> Tuple[Optional[Path], Optional[dict]]:
        """(манифест, None) или (None, параметры синтетики)."""
        manifest = self.value('manifest')
        if manifest:
            return self.resolve(manifest), None
        synth = dict(self.file_config.get('synth') or {})
        for flag, key in (('synth_n', 'n_subjects'), ('synth_seed', 'seed'), ('snr_db', 'snr_db')):
            if self.options.get(flag) is not None:
                synth[key] = self.options[flag]
        if not synth:
            raise ConfigError('Укажите --manifest или параметры синтетики (--synth-n, --synth-seed)')
        return None, synth

    def success(self, message: str):
        self.stdout.write(self.style.SUCCESS(message))

    def warning(self, message: str):
        self.stdout.write(self.style.WARNING(message))
