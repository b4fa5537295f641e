"""
Django settings for config project.
Generated by 'django-admin startproject' using Django 4.2.7.
"""

from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Quick-start development settings - unsuitable for production
SECRET_KEY = 'django-insecure-your-secret-key-change-this-in-production'

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = True

ALLOWED_HOSTS = ['localhost', '127.0.0.1']

# Application definition
INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'differentiation',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'config.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'config.wsgi.application'

# Database
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

# Password validation
AUTH_PASSWORD_VALIDATORS = [
    {
        'NAME': 'django.contrib.auth.password_validation.UserAttributeSimilarityValidator',
    },
    {
        'NAME': 'django.contrib.auth.password_validation.MinimumLengthValidator',
    },
    {
        'NAME': 'django.contrib.auth.password_validation.CommonPasswordValidator',
    },
    {
        'NAME': 'django.contrib.auth.password_validation.NumericPasswordValidator',
    },
]

# Internationalization
LANGUAGE_CODE = 'ru-ru'

TIME_ZONE = 'Europe/Moscow'

USE_I18N = True

USE_TZ = True

STATIC_URL = '/static/'

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Логирование: консоль, подробный формат
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'differentiation': {
            'handlers': ['console'],
            'level': 'INFO',
            'propagate': False,
        },
        'django': {
            'handlers': ['console'],
            'level': 'WARNING',
        },
    },
}

# Настройки конвейера дифференциации SZ/BP
DIFFERENTIATION_CONFIG = {
    # Частота дискретизации ICN по умолчанию (Гц)
    'SAMPLING_RATE': 2.0,
    'N_CHANNELS': 105,
    # Три полосы банка фильтров: (f_lo, f_hi) в Гц
    'BANDS': {
        'low': (0.01, 0.3),
        'mid': (0.3, 0.7),
        'high': (0.7, 0.99),
    },
    'FILTER_ORDER': 6,
    # Минимальный зазор f_hi до Найквиста, доля от fs/2
    'NYQUIST_MARGIN': 0.005,
    'STFT': {'window_len': 22, 'tukey_alpha': 0.25, 'hop': 21},
    'CWT': {'scales': list(range(1, 50)), 'omega0': 5.0},
    'TOP_K': 20,
    'HOLDOUT_FRACTION': 0.2,
    'CV_FOLDS': 5,
    'TRAIN': {
        'learning_rate': 1e-3,
        'beta1': 0.9,
        'beta2': 0.999,
        'eps': 1e-8,
        'epochs': 100,
        'batch_size': 32,
        'patience': 20,
        'validation_fraction': 0.2,
        # потолок памяти на прямой и обратный проход; больший батч считается частями
        'memory_budget_mb': 1024,
    },
    'GRIDS': {
        'LR': {'l2': [0.01, 0.1, 1.0, 10.0]},
        'SVM': {'C': [0.01, 0.1, 1.0, 10.0]},
        'LDA': {'ridge': [1e-6, 1e-3, 1e-1]},
        'GNB': {'var_floor': [1e-9, 1e-6]},
        'KNN': {'k': [3, 5, 7, 11]},
        'DT': {'max_depth': [2, 4, 8, None]},
        'RF': {'n_trees': [50, 100, 200], 'max_depth': [4, 8]},
    },
    'SYNTH': {
        'length': 234,
        'sz_tone_hz': 0.50,
        'bp_tone_hz': 0.15,
        'sz_coupled_channels': list(range(0, 8)),
        'bp_coupled_channels': list(range(8, 16)),
        'noise_band': (0.01, 0.95),
    },
    'ARTIFACT_FORMAT_VERSION': 1,
}
