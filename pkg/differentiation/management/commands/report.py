# differentiation/management/commands/report.py
import json

import pandas as pd

from ...models import ExperimentRun
from ..base import PipelineCommand

FORMATS = ('csv', 'json', 'xlsx')


class Command(PipelineCommand):
    help = 'Сводный отчёт по сохранённым прогонам: CSV, JSON и Excel'

    def add_pipeline_arguments(self, parser):
        parser.add_argument('--out', help='Каталог для файлов отчёта')
        parser.add_argument('--format', action='append', choices=FORMATS, dest='formats',
                            help='Формат (можно несколько); по умолчанию все')
        parser.add_argument('--best', action='store_true', help='Только лучший прогон каждой пары')

    def run(self):
        runs = ExperimentRun.objects.best_per_pair() if self.options.get('best') else ExperimentRun.objects.all()
        data = [run.as_row() for run in runs]
        if not data:
            self.warning('Нет сохранённых прогонов')
            return
        out_dir = self.resolve(self.value('out', 'reports'))
        out_dir.mkdir(parents=True, exist_ok=True)
        df = pd.DataFrame(data)
        written = []
        for fmt in self.options.get('formats') or self.file_config.get('formats') or FORMATS:
            path = out_dir / f'experiments.{fmt}'
            if fmt == 'csv':
                df.to_csv(path, index=False, float_format='%.17g', lineterminator='\n')
            elif fmt == 'json':
                path.write_text(json.dumps(data, indent=2, ensure_ascii=False) + '\n', encoding='utf-8')
            else:
                self.write_xlsx(df, path)
            written.append(path)
        self.success(f'Отчёт по {len(data)} прогонам: ' + ', '.join(str(p) for p in written))

    @staticmethod
    def write_xlsx(df: pd.DataFrame, path):
        with pd.ExcelWriter(path, engine='openpyxl') as writer:
            df.to_excel(writer, sheet_name='Эксперименты', index=False)
            worksheet = writer.sheets['Эксперименты']
            for column in worksheet.columns:
                max_length = max(len(str(cell.value)) for cell in column if cell.value is not None)
                worksheet.column_dimensions[column[0].column_letter].width = min(max_length + 2, 50)
